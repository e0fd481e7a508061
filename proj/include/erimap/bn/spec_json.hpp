#pragma once
// JSON form of NetworkSpec, field for field:
//
//   {"nodes": [{"id": ..., "states": [...], "critical_states": [...],
//               "table": {"parents": [...], "rows": [{"given": [...], "probs": [...]}]}}],
//    "edges": [["parent", "child"], ...],
//    "key_nodes": [...]}

#include "erimap/bn/network.hpp"
#include "erimap/json_util.hpp"

#include <filesystem>
#include <string>
#include <utility>

namespace erimap::bn {

inline NetworkSpec network_spec_from_json(const nlohmann::json& j, const std::string& where = "network") {
  using json_util::as;
  using json_util::field;
  using json_util::get;
  NetworkSpec spec;
  const auto& nodes = field(j, "nodes", where);
  require(nodes.is_array(), ErrorCode::ParseError, where + ": 'nodes' must be an array");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& jn = nodes[i];
    const std::string at = where + ".nodes[" + std::to_string(i) + "]";
    NodeSpec node;
    node.id = get<std::string>(jn, "id", at);
    node.states = get<std::vector<std::string>>(jn, "states", at);
    if (jn.contains("critical_states")) node.critical_states = get<std::vector<std::string>>(jn, "critical_states", at);
    const auto& table = field(jn, "table", at);
    node.table.parents = get<std::vector<std::string>>(table, "parents", at + ".table");
    const auto& rows = field(table, "rows", at + ".table");
    require(rows.is_array(), ErrorCode::ParseError, at + ".table: 'rows' must be an array");
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const std::string rat = at + ".table.rows[" + std::to_string(r) + "]";
      node.table.rows.push_back(
          {get<std::vector<std::string>>(rows[r], "given", rat), get<std::vector<double>>(rows[r], "probs", rat)});
    }
    spec.nodes.push_back(std::move(node));
  }
  const auto& edges = field(j, "edges", where);
  require(edges.is_array(), ErrorCode::ParseError, where + ": 'edges' must be an array");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    auto pair = as<std::vector<std::string>>(edges[i], where + ".edges[" + std::to_string(i) + "]");
    require(pair.size() == 2, ErrorCode::ParseError, where + ".edges[" + std::to_string(i) + "]: expected [parent, child]");
    spec.edges.emplace_back(pair[0], pair[1]);
  }
  if (j.contains("key_nodes")) spec.key_nodes = get<std::vector<std::string>>(j, "key_nodes", where);
  return spec;
}

inline nlohmann::json network_spec_to_json(const NetworkSpec& spec) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : spec.nodes) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : n.table.rows) rows.push_back({{"given", r.given}, {"probs", r.probs}});
    nodes.push_back({{"id", n.id},
                     {"states", n.states},
                     {"critical_states", n.critical_states},
                     {"table", {{"parents", n.table.parents}, {"rows", rows}}}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [p, c] : spec.edges) edges.push_back({p, c});
  return {{"nodes", nodes}, {"edges", edges}, {"key_nodes", spec.key_nodes}};
}

inline NetworkSpec load_network_spec(const std::filesystem::path& path) {
  return network_spec_from_json(json_util::load(path), path.string());
}

}  // namespace erimap::bn
