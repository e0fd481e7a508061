#!/usr/bin/env python3
"""Writes the chemical-plant scenario bundle under scenarios/henkel/.

Footprints are synthetic 60 x 50 m rectangles laid out in rows so that each
row falls in exactly one nested threat zone (or none).
"""
import json
import pathlib

OUT = pathlib.Path(__file__).resolve().parent.parent / "scenarios" / "henkel"
BASE = "2024-06-03T"

OFFICE = [2, 3, 5, 7, 8, 11, 12, 18, 25, 26, 27]
PRODUCTION = [4, 6, 10, 13, 16, 17, 21, 23]
MIXED = [1, 9, 14, 15, 19, 20, 22, 24]

ZONE_600 = [6, 7, 8, 9, 10, 11, 13, 14, 16, 17, 26]
ZONE_400 = [4, 12, 19, 21, 24]
ZONE_200 = [15, 20, 22, 23, 25]
OUTSIDE = [1, 2, 3, 5, 18, 27]

ZONE_VECTORS = [(ZONE_600, [0.8, 0.2]), (ZONE_400, [0.6, 0.4]), (ZONE_200, [0.3, 0.7])]

TIME_OF_DAY = "Time of Day"
BUILDING_TYPE = "Building Type"
PEOPLE = "People in Building"
AROUND = "Critical Gas Dose around Building"
INSIDE = "Critical Gas Dose in Building"
AFFECTED = "People in Building Affected"


def building_type(b):
    if b in OFFICE:
        return "Office"
    if b in PRODUCTION:
        return "Production"
    return "Mixed"


def rect(x, y, w=60.0, h=50.0):
    return [[x, y], [x + w, y], [x + w, y + h], [x, y + h], [x, y]]


def footprints():
    rows = [(ZONE_600, 600.0), (ZONE_400, 420.0), (ZONE_200, 240.0), (OUTSIDE, 40.0)]
    out = {}
    for ids, y in rows:
        for i, b in enumerate(ids):
            out[b] = rect(40.0 + i * 85.0, y)
    return out


def areas_doc():
    fp = footprints()
    features = []
    for b in range(1, 28):
        features.append({
            "type": "Feature",
            "id": str(b),
            "geometry": {"type": "Polygon", "coordinates": [fp[b]]},
            "properties": {"name": f"Building {b}", "building_type": building_type(b)},
        })
    return {"type": "FeatureCollection", "features": features}


def zones_doc():
    def zone(zid, ppm, ymin):
        ring = [[0.0, ymin + 20.0], [300.0, ymin], [1000.0, ymin], [1000.0, 820.0], [0.0, 820.0], [0.0, ymin + 20.0]]
        return {
            "type": "Feature",
            "id": zid,
            "geometry": {"type": "Polygon", "coordinates": [ring]},
            "properties": {"concentration_ppm": ppm},
        }
    return {"type": "FeatureCollection",
            "features": [zone("zone-200", 200, 200.0), zone("zone-400", 400, 380.0), zone("zone-600", 600, 540.0)]}


def obs(oid, minute, location, node, tier, source, **payload):
    o = {"id": oid, "time": f"{BASE}00:{minute:02d}:00Z", "location": location, "node": node, "tier": tier}
    o.update(payload)
    o["source"] = source
    return o


def t0_rows(shift):
    rows = [obs("t0-clock", 0, "all", TIME_OF_DAY, "RS3", "Clock", state=shift)]
    for b in range(1, 28):
        rows.append(obs(f"t0-gis-{b:02d}", 0, [str(b)], BUILDING_TYPE, "RS3", "GIS", state=building_type(b)))
    return rows


def t1_rows():
    rows = []
    for ids, vec in ZONE_VECTORS:
        for b in ids:
            rows.append(obs(f"t1-sim-{b:02d}", 5, [str(b)], AROUND, "RS3", "Simulation", probability_ratio=vec))
    return rows


def state_rows(prefix, minute, ids, node, state, tier, source):
    return [obs(f"{prefix}-{b:02d}", minute, [str(b)], node, tier, source, state=state) for b in ids]


def gas_rows(prefix, minute, ids):
    return [obs(f"{prefix}-{b:02d}", minute, [str(b)], INSIDE, "RS3", "Gas Sensor", likelihood_ratio=[0.9, 0.1])
            for b in ids]


def scenario1():
    rows = t0_rows("6pm-6am") + t1_rows()
    rows += state_rows("t2-people", 10, [9, 13, 17, 21], PEOPLE, "True", "RS2", "Security Staff")
    rows += state_rows("t2-empty", 10, [4, 10, 16, 19], PEOPLE, "False", "RS2", "Security Staff")
    rows += gas_rows("t3-gas", 15, [6, 8, 9, 17, 26])
    return rows


def scenario2():
    rows = t0_rows("6am-6pm") + t1_rows()
    rows += state_rows("t2-cleared", 10, [4, 8, 11, 16, 21, 22, 23, 26], PEOPLE, "False", "RS3", "Fire Brigade")
    rows += state_rows("t2-empty", 10, [10, 14, 20, 24], PEOPLE, "False", "RS2", "Security Staff")
    rows += gas_rows("t3-gas", 15, [6, 7, 14, 17])
    rows += state_rows("t3-cleared", 15, [1, 2, 3, 24, 25, 27, 10, 18], PEOPLE, "False", "RS3", "Fire Brigade")
    rows += state_rows("t4-cleared", 20, [5, 6, 9, 15, 20], PEOPLE, "False", "RS3", "Fire Brigade")
    rows += state_rows("t4-unaffected", 20, [7, 17], AFFECTED, "False", "RS1", "Civilian")
    rows += state_rows("t5-affected", 25, [17], AFFECTED, "True", "RS2", "Security Staff")
    rows += state_rows("t5-cleared", 25, [7, 12, 14, 19], PEOPLE, "False", "RS3", "Fire Brigade")
    rows += state_rows("t5-empty", 25, [13], PEOPLE, "False", "RS2", "Security Staff")
    return rows


def table3():
    b = ["17"]
    return [
        obs("clock", 0, b, TIME_OF_DAY, "RS3", "Clock", state="6am-6pm"),
        obs("gis", 0, b, BUILDING_TYPE, "RS3", "GIS", state="Production"),
        obs("simulation", 5, b, AROUND, "RS3", "Simulation", probability_ratio=[0.8, 0.2]),
        obs("civilian-1", 8, b, PEOPLE, "RS1", "Civilian", state="False"),
        obs("civilian-2", 12, b, PEOPLE, "RS1", "Civilian", state="True"),
        obs("gas-sensor-1", 14, b, INSIDE, "RS3", "Gas Sensor", likelihood_ratio=[0.9, 0.1]),
        obs("gas-sensor-2", 15, b, INSIDE, "RS3", "Gas Sensor", likelihood_ratio=[0.9, 0.1]),
    ]


def write_json(name, doc):
    (OUT / name).write_text(json.dumps(doc, indent=2) + "\n")


def write_ndjson(name, rows):
    (OUT / name).write_text("".join(json.dumps(r) + "\n" for r in rows))


def main():
    write_json("areas.geojson", areas_doc())
    write_json("threat_zones.geojson", zones_doc())
    write_json("substances.json", {"chlorine": {"a": -8.29, "b": 0.92, "n": 2}})
    write_json("bundle.json", {
        "network": "network.json",
        "areas": "areas.geojson",
        "threat_zones": "threat_zones.geojson",
        "substances": "substances.json",
        "reliability": {"RS1": 0.7, "RS2": 0.8, "RS3": 1.0},
        "theta": 0.1,
        "layers": [{"layer": "building_type", "node": BUILDING_TYPE}],
        "script": "scenario1.ndjson",
    })
    write_ndjson("scenario1.ndjson", scenario1())
    write_ndjson("scenario2.ndjson", scenario2())
    write_ndjson("table3.ndjson", table3())


if __name__ == "__main__":
    main()
