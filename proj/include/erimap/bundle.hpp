#pragma once
// Scenario bundle: the preparation-phase artifacts in one directory.
//
//   bundle.json
//     {"network": "network.json", "areas": "areas.geojson",
//      "threat_zones": "threat_zones.geojson", "substances": "substances.json",
//      "reliability": {"RS1": 0.7, "RS2": 0.8, "RS3": 1.0}, "theta": 0.1,
//      "key_nodes": [...],                              (optional, else the network's)
//      "layers": [{"layer": "building_type", "node": "Building Type"}],
//      "script": "scenario1.ndjson"}                    (optional)

#include "erimap/bn/network.hpp"
#include "erimap/bn/spec_json.hpp"
#include "erimap/error.hpp"
#include "erimap/evidence.hpp"
#include "erimap/hazard.hpp"
#include "erimap/json_util.hpp"
#include "erimap/observation.hpp"
#include "erimap/pipeline.hpp"
#include "erimap/spatial.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace erimap::bundle {

namespace fs = std::filesystem;

struct LayerLink {
  std::string layer;
  std::string node_id;
};

struct ScenarioBundle {
  fs::path root;
  std::shared_ptr<const bn::Network> network;
  std::vector<spatial::Area> areas;
  std::vector<spatial::ThreatZone> zones;
  std::map<std::string, hazard::ProbitParams> substances;
  evidence::EvidenceConfig evidence;
  std::vector<LayerLink> layers;
  std::optional<fs::path> script_path;
};

namespace detail {

template <class F>
auto in_file(const std::string& file, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError || e.code() == ErrorCode::IoError) throw;
    fail(ErrorCode::CrossValidationError, file + ": " + e.what());
  }
}

}  // namespace detail

/// Checks a script against the bundle: every area, node, state, tier and
/// vector length must resolve. Throws CrossValidationError naming the
/// observation.
inline void validate_script(const ScenarioBundle& b, const std::vector<Observation>& script, const std::string& file) {
  std::set<std::string> area_ids;
  for (const auto& a : b.areas) area_ids.insert(a.id);
  std::set<std::string> ids;
  for (std::size_t i = 0; i < script.size(); ++i) {
    const auto& obs = script[i];
    const std::string at = file + ": observation #" + std::to_string(i + 1) + " ('" + obs.id + "')";
    require(ids.insert(obs.id).second, ErrorCode::CrossValidationError, at + ": duplicate observation id");
    for (const auto& a : obs.location.areas) {
      require(area_ids.count(a) == 1, ErrorCode::CrossValidationError, at + ": unknown area '" + a + "'");
    }
    try {
      (void)evidence::classify(obs, b.evidence, *b.network);
    } catch (const Error& e) {
      fail(ErrorCode::CrossValidationError, at + ": " + e.what());
    }
  }
}

inline std::vector<Observation> load_script(const ScenarioBundle& b, const fs::path& path) {
  auto script = parse_ndjson(json_util::read_text(path), path.filename().string());
  validate_script(b, script, path.filename().string());
  return script;
}

/// Loads and cross-validates a bundle directory (or a bundle.json path).
/// Throws ParseError, IoError, CrossValidationError.
inline ScenarioBundle load_bundle(const fs::path& path) {
  using json_util::field;
  using json_util::get;
  const fs::path manifest_path = fs::is_directory(path) ? path / "bundle.json" : path;
  const fs::path root = manifest_path.parent_path();
  const std::string where = manifest_path.filename().string();
  const auto manifest = json_util::load(manifest_path);

  ScenarioBundle b;
  b.root = root;

  const auto network_file = get<std::string>(manifest, "network", where);
  auto spec = bn::load_network_spec(root / network_file);
  if (manifest.contains("key_nodes")) spec.key_nodes = get<std::vector<std::string>>(manifest, "key_nodes", where);
  b.network = std::make_shared<const bn::Network>(detail::in_file(network_file, [&] { return bn::build_network(spec); }));
  require(!b.network->key_nodes().empty(), ErrorCode::CrossValidationError, where + ": no key nodes declared");

  const auto areas_file = get<std::string>(manifest, "areas", where);
  b.areas = detail::in_file(areas_file, [&] { return spatial::load_areas(root / areas_file); });
  const auto zones_file = get<std::string>(manifest, "threat_zones", where);
  b.zones = detail::in_file(zones_file, [&] { return spatial::load_zones(root / zones_file); });
  const auto substances_file = get<std::string>(manifest, "substances", where);
  b.substances = detail::in_file(substances_file, [&] { return hazard::load_substances(root / substances_file); });

  const auto reliability = get<std::map<std::string, double>>(manifest, "reliability", where);
  b.evidence.reliability = detail::in_file(where, [&] { return evidence::make_reliability_table(reliability); });
  b.evidence.regret.theta = get<double>(manifest, "theta", where);
  detail::in_file(where, [&] { evidence::validate(b.evidence.regret); });
  for (Tier t : {Tier::RS1, Tier::RS2, Tier::RS3}) {
    require(b.evidence.reliability.count(t) == 1, ErrorCode::ParseError,
            where + ": field 'reliability' lacks tier " + std::string(to_string(t)));
  }

  if (manifest.contains("layers")) {
    const auto& layers = field(manifest, "layers", where);
    require(layers.is_array(), ErrorCode::ParseError, where + ": 'layers' must be an array");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const std::string at = where + ".layers[" + std::to_string(i) + "]";
      b.layers.push_back({get<std::string>(layers[i], "layer", at), get<std::string>(layers[i], "node", at)});
    }
  }
  for (const auto& link : b.layers) {
    for (const auto& area : b.areas) {
      detail::in_file(areas_file + " (feature '" + area.id + "')",
                      [&] { (void)spatial::layer_to_evidence(area, link.layer, link.node_id, *b.network); });
    }
  }

  if (manifest.contains("script")) {
    b.script_path = root / get<std::string>(manifest, "script", where);
    (void)load_script(b, *b.script_path);
  }
  return b;
}

inline pipeline::Engine make_engine(const ScenarioBundle& b) {
  return pipeline::Engine(b.network, b.areas, b.evidence);
}

/// Soft-evidence observations for the zone-derived critical gas dose:
/// each area overlapping a zone gets the probit probability for the
/// highest overlapping concentration held for `minutes`.
inline std::vector<Observation> exposure_observations(const ScenarioBundle& b, const std::string& node_id,
                                                      const hazard::ProbitParams& params, double minutes,
                                                      Timestamp time) {
  std::vector<Observation> out;
  for (const auto& area : b.areas) {
    auto ppm = spatial::max_zone_overlap(area, b.zones);
    if (!ppm) continue;
    Observation obs;
    obs.id = "exposure:" + area.id;
    obs.time = time;
    obs.location = Location::of({area.id});
    obs.node_id = node_id;
    obs.tier = Tier::RS3;
    obs.payload = ProbRatio{hazard::exposure_to_soft_evidence({*ppm, minutes}, params)};
    obs.source = "threat zone " + std::to_string(static_cast<long long>(*ppm)) + " ppm, " + params.substance;
    out.push_back(std::move(obs));
  }
  return out;
}

}  // namespace erimap::bundle
