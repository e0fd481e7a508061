#pragma once
// Serialized views of the engine: snapshot JSON, timeline CSV, belief
// choropleths and per-area time series. All output is a pure function of
// the engine state, so identical inputs give byte-identical files.

#include "erimap/bn/network.hpp"
#include "erimap/error.hpp"
#include "erimap/observation.hpp"
#include "erimap/pipeline.hpp"
#include "erimap/spatial.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace erimap::io {

using nlohmann::json;

/// Shortest decimal form that reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, end) : std::to_string(v);
}

inline json distribution_to_json(const bn::Network& net, const bn::Distribution& d) {
  const auto& node = net.node(net.index_of(d.node_id));
  return {{"node", d.node_id}, {"states", node.states}, {"probs", d.probs}};
}

inline json snapshot_to_json(const bn::Network& net, const pipeline::BeliefSnapshot& s) {
  json marginals = json::array();
  for (const auto& d : s.marginals) marginals.push_back(distribution_to_json(net, d));
  return {{"seq", s.seq},
          {"step", s.step},
          {"time", s.time ? json(format_timestamp(*s.time)) : json(nullptr)},
          {"area_id", s.area_id},
          {"trigger", s.trigger},
          {"marginals", std::move(marginals)},
          {"confirmed", s.confirmed}};
}

namespace detail {

inline std::string csv_field(const std::string& v) {
  if (v.find_first_of(",\"\r\n") == std::string::npos) return v;
  std::string out = "\"";
  for (char c : v) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

/// RFC 4180 CSV, one row per (snapshot, key node, state).
inline std::string timeline_csv(const bn::Network& net, const std::vector<pipeline::BeliefSnapshot>& timeline) {
  std::string out = "seq,time,area_id,node_id,state,probability,trigger_observation_id\r\n";
  for (const auto& s : timeline) {
    const std::string time = s.time ? format_timestamp(*s.time) : "";
    for (const auto& d : s.marginals) {
      const auto& node = net.node(net.index_of(d.node_id));
      for (std::size_t i = 0; i < d.probs.size(); ++i) {
        out += std::to_string(s.seq) + ',' + time + ',' + detail::csv_field(s.area_id) + ',' +
               detail::csv_field(d.node_id) + ',' + detail::csv_field(node.states[i]) + ',' +
               format_double(d.probs[i]) + ',' + detail::csv_field(s.trigger) + "\r\n";
      }
    }
  }
  return out;
}

/// Choropleth of a key node as of engine step `step`, built from the
/// snapshot timeline. Carries "step" and "time" (time of the latest
/// accepted observation, null before any) as extra members.
/// Throws UnknownNode (also when the node is not a key node), InvalidState.
inline json map_at_step(const pipeline::Engine& engine, std::uint64_t step, const std::string& node_id,
                        const std::string& state) {
  const auto& net = engine.network();
  const bn::NodeIndex n = net.index_of(node_id);
  const std::size_t s = net.state_index(n, state);
  const auto& keys = net.key_nodes();
  auto key_pos = std::find(keys.begin(), keys.end(), n);
  require(key_pos != keys.end(), ErrorCode::UnknownNode, "'" + node_id + "' is not a key node");
  const auto k = static_cast<std::size_t>(key_pos - keys.begin());

  const auto snaps = engine.snapshots_at(step);
  std::optional<Timestamp> time;
  for (const auto& snap : engine.timeline()) {
    if (snap.step > step) break;
    if (snap.time) time = snap.time;
  }
  json doc = spatial::choropleth(engine.areas(), node_id, state, [&](const spatial::Area& a) {
    auto it = std::find_if(snaps.begin(), snaps.end(), [&](const auto& x) { return x.area_id == a.id; });
    require(it != snaps.end(), ErrorCode::UnknownArea, "no snapshot for area '" + a.id + "'");
    const bool confirmed = std::find(it->confirmed.begin(), it->confirmed.end(), node_id) != it->confirmed.end();
    return spatial::AreaValue{it->marginals[k].probs[s], confirmed};
  });
  doc["step"] = std::min(step, engine.step());
  doc["time"] = time ? json(format_timestamp(*time)) : json(nullptr);
  return doc;
}

/// Default choropleth target: first key node, its first critical state
/// (or first state when none is critical).
inline std::pair<std::string, std::string> default_target(const bn::Network& net) {
  require(!net.key_nodes().empty(), ErrorCode::UnknownNode, "network has no key nodes");
  const auto& node = net.node(net.key_nodes().front());
  auto crit = std::find(node.critical.begin(), node.critical.end(), true);
  const std::size_t s = crit == node.critical.end() ? 0 : static_cast<std::size_t>(crit - node.critical.begin());
  return {node.id, node.states[s]};
}

}  // namespace erimap::io
