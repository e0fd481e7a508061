#pragma once
// Areas of the site, the evidence each area has accumulated, and the
// GeoJSON surfaces (building footprints in, threat zones in, belief
// choropleths out).
//
// Every area shares one immutable network; only evidence is per area.

#include "erimap/bn/inference.hpp"
#include "erimap/bn/network.hpp"
#include "erimap/error.hpp"
#include "erimap/geometry.hpp"
#include "erimap/json_util.hpp"
#include "erimap/observation.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace erimap::spatial {

struct Area {
  std::string id;
  geometry::Polygon footprint;
  std::map<std::string, std::string> attributes;  // GIS layer name → value
};

struct VirtualRecord {
  std::string node_id;
  std::vector<double> likelihood;
  std::string observation_id;

  friend bool operator==(const VirtualRecord&, const VirtualRecord&) = default;
};

struct SoftOverride {
  std::vector<double> ratio;
  std::vector<double> likelihood;  // ratio converted against the node's prior
  std::string observation_id;

  friend bool operator==(const SoftOverride&, const SoftOverride&) = default;
};

struct AreaState {
  std::string area_id;
  bn::HardEvidence hard;
  std::vector<VirtualRecord> virtuals;
  std::map<std::string, SoftOverride> soft_overrides;
  std::set<std::string> confirmed;

  /// Virtual vectors in arrival order, then soft-derived vectors by node id.
  [[nodiscard]] std::vector<bn::Likelihood> likelihoods() const {
    std::vector<bn::Likelihood> out;
    out.reserve(virtuals.size() + soft_overrides.size());
    for (const auto& v : virtuals) out.push_back({v.node_id, v.likelihood});
    for (const auto& [node, s] : soft_overrides) out.push_back({node, s.likelihood});
    return out;
  }

  [[nodiscard]] bool is_confirmed(const std::string& node_id) const { return confirmed.count(node_id) > 0; }

  friend bool operator==(const AreaState&, const AreaState&) = default;
};

struct ThreatZone {
  std::string id;
  geometry::Polygon polygon;
  double concentration_ppm = 0.0;
};

/// One empty evidence record per area. Throws DuplicateAreaId.
inline std::map<std::string, AreaState> instantiate_areas(const bn::Network& /*net*/, const std::vector<Area>& areas) {
  std::map<std::string, AreaState> out;
  for (const auto& a : areas) {
    AreaState s;
    s.area_id = a.id;
    require(out.emplace(a.id, std::move(s)).second, ErrorCode::DuplicateAreaId, "duplicate area id '" + a.id + "'");
  }
  return out;
}

/// Unambiguous RS3 observation of `node_id` taken from the area's value
/// on a GIS layer. Throws MissingAttribute, UnmappedAttributeValue, UnknownNode.
inline Observation layer_to_evidence(const Area& area, const std::string& layer, const std::string& node_id,
                                     const bn::Network& net, Timestamp time = {}) {
  auto attr = area.attributes.find(layer);
  require(attr != area.attributes.end(), ErrorCode::MissingAttribute,
          "area '" + area.id + "' has no '" + layer + "' attribute");
  const bn::NodeIndex n = net.index_of(node_id);
  require(net.find_state(n, attr->second).has_value(), ErrorCode::UnmappedAttributeValue,
          "area '" + area.id + "' " + layer + "='" + attr->second + "' is not a state of '" + node_id + "'");
  Observation obs;
  obs.id = "layer:" + layer + ":" + area.id;
  obs.time = time;
  obs.location = Location::of({area.id});
  obs.node_id = node_id;
  obs.tier = Tier::RS3;
  obs.payload = UnambiguousState{attr->second};
  obs.source = "GIS layer " + layer;
  return obs;
}

/// Highest concentration among zones sharing positive area with the
/// footprint, or nullopt when none does.
inline std::optional<double> max_zone_overlap(const Area& area, const std::vector<ThreatZone>& zones) {
  std::optional<double> best;
  for (const auto& z : zones) {
    if (geometry::overlaps(area.footprint, z.polygon) && (!best || z.concentration_ppm > *best)) {
      best = z.concentration_ppm;
    }
  }
  return best;
}

inline bn::Distribution area_posterior(const bn::Network& net, const AreaState& state, std::string_view node_id) {
  const auto liks = state.likelihoods();
  return bn::query(net, node_id, state.hard, liks);
}

// --- GeoJSON -----------------------------------------------------------------

inline nlohmann::json polygon_geometry(const geometry::Polygon& poly) {
  nlohmann::json rings = nlohmann::json::array();
  for (const auto& ring : geometry::rings_of(poly)) {
    nlohmann::json coords = nlohmann::json::array();
    for (const auto& [x, y] : ring) coords.push_back({x, y});
    rings.push_back(std::move(coords));
  }
  return {{"type", "Polygon"}, {"coordinates", std::move(rings)}};
}

struct AreaValue {
  double probability = 0.0;
  bool confirmed = false;
};

/// FeatureCollection with one feature per area, in the given area order.
inline nlohmann::json choropleth(const std::vector<Area>& areas, const std::string& node_id, const std::string& state,
                                 const std::function<AreaValue(const Area&)>& value_of) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& a : areas) {
    const AreaValue v = value_of(a);
    features.push_back({{"type", "Feature"},
                        {"id", a.id},
                        {"geometry", polygon_geometry(a.footprint)},
                        {"properties", {{"area_id", a.id}, {"probability", v.probability}, {"confirmed", v.confirmed}}}});
  }
  return {{"type", "FeatureCollection"}, {"node", node_id}, {"state", state}, {"features", std::move(features)}};
}

/// Current posterior of `node_id = state` for every area.
/// Throws UnknownNode, InvalidState, UnknownArea.
inline nlohmann::json beliefs_to_geojson(const std::map<std::string, AreaState>& states, const bn::Network& net,
                                         const std::vector<Area>& areas, const std::string& node_id,
                                         const std::string& state) {
  const bn::NodeIndex n = net.index_of(node_id);
  const std::size_t s = net.state_index(n, state);
  return choropleth(areas, node_id, state, [&](const Area& a) {
    auto it = states.find(a.id);
    require(it != states.end(), ErrorCode::UnknownArea, "no evidence record for area '" + a.id + "'");
    return AreaValue{area_posterior(net, it->second, node_id).probs[s], it->second.is_confirmed(node_id)};
  });
}

namespace detail {

inline std::string feature_id(const nlohmann::json& f, const std::string& at) {
  auto id = f.find("id");
  if (id == f.end() && f.contains("properties") && f["properties"].is_object()) {
    auto pid = f["properties"].find("id");
    if (pid != f["properties"].end()) id = pid;
  }
  require(id != f.end(), ErrorCode::ParseError, at + ": feature has no 'id'");
  if (id->is_string()) return id->get<std::string>();
  if (id->is_number_integer()) return std::to_string(id->get<long long>());
  fail(ErrorCode::ParseError, at + ": feature id must be a string or integer");
}

inline geometry::Polygon feature_polygon(const nlohmann::json& f, const std::string& at) {
  const auto& geom = json_util::field(f, "geometry", at);
  const auto type = json_util::get<std::string>(geom, "type", at + ".geometry");
  require(type == "Polygon", ErrorCode::ParseError, at + ": geometry type '" + type + "' is not supported (Polygon only)");
  auto rings = json_util::get<std::vector<geometry::Ring>>(geom, "coordinates", at + ".geometry");
  return geometry::make_polygon(rings, at);
}

inline const nlohmann::json& features_of(const nlohmann::json& doc, const std::string& where) {
  require(json_util::get<std::string>(doc, "type", where) == "FeatureCollection", ErrorCode::ParseError,
          where + ": expected a FeatureCollection");
  const auto& features = json_util::field(doc, "features", where);
  require(features.is_array(), ErrorCode::ParseError, where + ": 'features' must be an array");
  return features;
}

}  // namespace detail

/// Building footprints. Every string or number property becomes a layer
/// attribute. Throws ParseError, InvalidGeometry, DuplicateAreaId.
inline std::vector<Area> areas_from_geojson(const nlohmann::json& doc, const std::string& where = "areas") {
  std::vector<Area> out;
  std::set<std::string> seen;
  const auto& features = detail::features_of(doc, where);
  for (std::size_t i = 0; i < features.size(); ++i) {
    const std::string at = where + ".features[" + std::to_string(i) + "]";
    Area a;
    a.id = detail::feature_id(features[i], at);
    require(seen.insert(a.id).second, ErrorCode::DuplicateAreaId, at + ": duplicate area id '" + a.id + "'");
    a.footprint = detail::feature_polygon(features[i], at + " (area '" + a.id + "')");
    if (auto props = features[i].find("properties"); props != features[i].end() && props->is_object()) {
      for (const auto& [k, v] : props->items()) {
        if (v.is_string()) {
          a.attributes[k] = v.get<std::string>();
        } else if (v.is_number() || v.is_boolean()) {
          a.attributes[k] = v.dump();
        }
      }
    }
    out.push_back(std::move(a));
  }
  return out;
}

/// Threat zones; each feature needs properties.concentration_ppm > 0.
inline std::vector<ThreatZone> zones_from_geojson(const nlohmann::json& doc, const std::string& where = "zones") {
  std::vector<ThreatZone> out;
  const auto& features = detail::features_of(doc, where);
  for (std::size_t i = 0; i < features.size(); ++i) {
    const std::string at = where + ".features[" + std::to_string(i) + "]";
    ThreatZone z;
    z.id = features[i].contains("id") ? detail::feature_id(features[i], at) : std::to_string(i);
    z.polygon = detail::feature_polygon(features[i], at);
    z.concentration_ppm =
        json_util::get<double>(json_util::field(features[i], "properties", at), "concentration_ppm", at + ".properties");
    require(z.concentration_ppm > 0.0, ErrorCode::ParseError, at + ": concentration_ppm must be positive");
    out.push_back(std::move(z));
  }
  return out;
}

inline std::vector<Area> load_areas(const std::filesystem::path& path) {
  return areas_from_geojson(json_util::load(path), path.filename().string());
}

inline std::vector<ThreatZone> load_zones(const std::filesystem::path& path) {
  return zones_from_geojson(json_util::load(path), path.filename().string());
}

}  // namespace erimap::spatial
