#pragma once
// Declarative discrete Bayesian network and its validated, immutable form.
//
// A NetworkSpec is what a scenario author writes: nodes with ordered state
// names, directed edges, and one probability table per node. build_network
// checks every structural and numerical invariant and produces a Network
// whose tables are flattened for inference. State order is preserved
// exactly as declared; every probability vector in the library is aligned
// to it.

#include "erimap/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace erimap::bn {

inline constexpr double kSumTolerance = 1e-9;

struct CptRow {
  std::vector<std::string> given;  // one state per parent, in CptTable::parents order
  std::vector<double> probs;       // over the node's own states
};

/// Marginal table when `parents` is empty, conditional table otherwise.
struct CptTable {
  std::vector<std::string> parents;
  std::vector<CptRow> rows;
};

struct NodeSpec {
  std::string id;
  std::vector<std::string> states;
  CptTable table;
  std::vector<std::string> critical_states;
};

struct NetworkSpec {
  std::vector<NodeSpec> nodes;
  std::vector<std::pair<std::string, std::string>> edges;  // (parent, child)
  std::vector<std::string> key_nodes;
};

/// Probability vector over one node's states, in declared order.
struct Distribution {
  std::string node_id;
  std::vector<double> probs;

  friend bool operator==(const Distribution&, const Distribution&) = default;
};

using NodeIndex = std::size_t;

class Network {
 public:
  struct Node {
    std::string id;
    std::vector<std::string> states;
    std::vector<NodeIndex> parents;  // table order
    std::vector<double> cpt;         // [parent configuration][own state], last parent varies fastest
    std::vector<bool> critical;      // per state

    [[nodiscard]] std::size_t num_states() const noexcept { return states.size(); }
    [[nodiscard]] bool has_critical_states() const noexcept {
      return std::find(critical.begin(), critical.end(), true) != critical.end();
    }
  };

  static Network build(const NetworkSpec& spec);

  [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
  [[nodiscard]] const Node& node(NodeIndex i) const { return nodes_.at(i); }
  [[nodiscard]] const std::vector<Node>& nodes() const noexcept { return nodes_; }
  [[nodiscard]] const std::vector<NodeIndex>& key_nodes() const noexcept { return key_nodes_; }
  [[nodiscard]] const std::vector<NodeIndex>& topological_order() const noexcept { return topo_; }
  [[nodiscard]] const NetworkSpec& spec() const noexcept { return spec_; }

  [[nodiscard]] std::optional<NodeIndex> find(std::string_view id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Throws UnknownNode.
  [[nodiscard]] NodeIndex index_of(std::string_view id) const {
    auto found = find(id);
    if (!found) fail(ErrorCode::UnknownNode, "unknown node '" + std::string(id) + "'");
    return *found;
  }

  [[nodiscard]] std::optional<std::size_t> find_state(NodeIndex n, std::string_view state) const {
    const auto& states = nodes_.at(n).states;
    auto it = std::find(states.begin(), states.end(), state);
    if (it == states.end()) return std::nullopt;
    return static_cast<std::size_t>(it - states.begin());
  }

  /// Throws InvalidState.
  [[nodiscard]] std::size_t state_index(NodeIndex n, std::string_view state) const {
    auto found = find_state(n, state);
    if (!found) {
      fail(ErrorCode::InvalidState,
           "node '" + nodes_.at(n).id + "' has no state '" + std::string(state) + "'");
    }
    return *found;
  }

  /// P(node = state | parents = parent_states), parent_states indexed by NodeIndex.
  [[nodiscard]] double conditional(NodeIndex n, std::size_t state, std::span<const std::size_t> assignment) const {
    const Node& nd = nodes_[n];
    std::size_t row = 0;
    for (NodeIndex p : nd.parents) row = row * nodes_[p].num_states() + assignment[p];
    return nd.cpt[row * nd.num_states() + state];
  }

 private:
  static std::optional<std::size_t> find_state_in(const NodeSpec& ns, std::string_view state) {
    auto it = std::find(ns.states.begin(), ns.states.end(), state);
    if (it == ns.states.end()) return std::nullopt;
    return static_cast<std::size_t>(it - ns.states.begin());
  }

  NetworkSpec spec_;
  std::vector<Node> nodes_;
  std::map<std::string, NodeIndex, std::less<>> index_;
  std::vector<NodeIndex> key_nodes_;
  std::vector<NodeIndex> topo_;
};

namespace detail {

inline std::string describe_cycle(const std::vector<std::vector<NodeIndex>>& parents,
                                  const std::vector<bool>& unresolved, const std::vector<NodeSpec>& nodes) {
  // Every unresolved node has at least one unresolved parent, so walking
  // parents from any of them must revisit a node.
  NodeIndex start = static_cast<NodeIndex>(std::find(unresolved.begin(), unresolved.end(), true) - unresolved.begin());
  std::vector<NodeIndex> path;
  std::vector<int> seen_at(nodes.size(), -1);
  NodeIndex cur = start;
  while (seen_at[cur] < 0) {
    seen_at[cur] = static_cast<int>(path.size());
    path.push_back(cur);
    for (NodeIndex p : parents[cur]) {
      if (unresolved[p]) {
        cur = p;
        break;
      }
    }
  }
  std::string out;
  for (std::size_t i = static_cast<std::size_t>(seen_at[cur]); i < path.size(); ++i) {
    out = nodes[path[i]].id + (out.empty() ? "" : " -> ") + out;
  }
  return nodes[cur].id + " -> " + out;
}

}  // namespace detail

inline Network Network::build(const NetworkSpec& spec) {
  Network net;
  net.spec_ = spec;
  const auto& specs = spec.nodes;
  require(!specs.empty(), ErrorCode::InvalidSpec, "network declares no nodes");

  for (NodeIndex i = 0; i < specs.size(); ++i) {
    const NodeSpec& ns = specs[i];
    require(!ns.id.empty(), ErrorCode::InvalidSpec, "node with empty id");
    require(net.index_.emplace(ns.id, i).second, ErrorCode::InvalidSpec, "duplicate node '" + ns.id + "'");
    require(ns.states.size() >= 2, ErrorCode::InvalidSpec, "node '" + ns.id + "' declares fewer than 2 states");
    std::set<std::string> unique(ns.states.begin(), ns.states.end());
    require(unique.size() == ns.states.size(), ErrorCode::InvalidSpec, "node '" + ns.id + "' has duplicate state names");
    for (const auto& c : ns.critical_states) {
      require(unique.count(c) == 1, ErrorCode::InvalidSpec,
              "node '" + ns.id + "' critical state '" + c + "' is not one of its states");
    }
  }

  std::vector<std::vector<NodeIndex>> edge_parents(specs.size());
  std::set<std::pair<NodeIndex, NodeIndex>> seen_edges;
  for (const auto& [from, to] : spec.edges) {
    auto p = net.find(from);
    auto c = net.find(to);
    if (!p || !c) {
      fail(ErrorCode::DanglingEdge, "edge " + from + " -> " + to + " references undeclared node '" +
                                        (p ? to : from) + "'");
    }
    require(*p != *c, ErrorCode::CycleDetected, "self-loop on node '" + from + "'");
    require(seen_edges.emplace(*p, *c).second, ErrorCode::InvalidSpec, "duplicate edge " + from + " -> " + to);
    edge_parents[*c].push_back(*p);
  }

  // Kahn's algorithm; ties resolved by declaration order.
  {
    std::vector<std::size_t> indegree(specs.size());
    std::vector<std::vector<NodeIndex>> children(specs.size());
    for (NodeIndex c = 0; c < specs.size(); ++c) {
      indegree[c] = edge_parents[c].size();
      for (NodeIndex p : edge_parents[c]) children[p].push_back(c);
    }
    std::set<NodeIndex> ready;
    for (NodeIndex i = 0; i < specs.size(); ++i) {
      if (indegree[i] == 0) ready.insert(i);
    }
    while (!ready.empty()) {
      NodeIndex n = *ready.begin();
      ready.erase(ready.begin());
      net.topo_.push_back(n);
      for (NodeIndex c : children[n]) {
        if (--indegree[c] == 0) ready.insert(c);
      }
    }
    if (net.topo_.size() != specs.size()) {
      std::vector<bool> unresolved(specs.size(), true);
      for (NodeIndex n : net.topo_) unresolved[n] = false;
      fail(ErrorCode::CycleDetected, "cycle " + detail::describe_cycle(edge_parents, unresolved, specs));
    }
  }

  net.nodes_.reserve(specs.size());
  for (NodeIndex i = 0; i < specs.size(); ++i) {
    const NodeSpec& ns = specs[i];
    const std::string where = "node '" + ns.id + "': ";
    Node node;
    node.id = ns.id;
    node.states = ns.states;
    node.critical.assign(ns.states.size(), false);
    for (const auto& c : ns.critical_states) node.critical[*find_state_in(ns, c)] = true;

    std::set<std::string> declared(ns.table.parents.begin(), ns.table.parents.end());
    require(declared.size() == ns.table.parents.size(), ErrorCode::MalformedTable, where + "table lists a parent twice");
    std::set<std::string> from_edges;
    for (NodeIndex p : edge_parents[i]) from_edges.insert(specs[p].id);
    require(declared == from_edges, ErrorCode::MalformedTable, where + "table parents do not match incoming edges");

    std::size_t configs = 1;
    for (const auto& pid : ns.table.parents) {
      NodeIndex p = *net.find(pid);
      node.parents.push_back(p);
      configs *= specs[p].states.size();
    }

    const std::size_t n_states = ns.states.size();
    node.cpt.assign(configs * n_states, 0.0);
    std::vector<bool> filled(configs, false);
    for (const CptRow& row : ns.table.rows) {
      require(row.given.size() == node.parents.size(), ErrorCode::MalformedTable,
              where + "row has " + std::to_string(row.given.size()) + " parent states, expected " +
                  std::to_string(node.parents.size()));
      std::size_t r = 0;
      std::string label;
      for (std::size_t k = 0; k < node.parents.size(); ++k) {
        const NodeSpec& ps = specs[node.parents[k]];
        auto s = find_state_in(ps, row.given[k]);
        require(s.has_value(), ErrorCode::MalformedTable,
                where + "row references unknown state '" + row.given[k] + "' of parent '" + ps.id + "'");
        r = r * ps.states.size() + *s;
        label += (k ? "," : "") + row.given[k];
      }
      require(!filled[r], ErrorCode::MalformedTable, where + "duplicate row (" + label + ")");
      filled[r] = true;
      require(row.probs.size() == n_states, ErrorCode::MalformedTable,
              where + "row (" + label + ") has " + std::to_string(row.probs.size()) + " entries, expected " +
                  std::to_string(n_states));
      double sum = 0.0;
      for (std::size_t s = 0; s < n_states; ++s) {
        double v = row.probs[s];
        require(std::isfinite(v) && v >= 0.0 && v <= 1.0, ErrorCode::MalformedTable,
                where + "row (" + label + ") entry outside [0, 1]");
        sum += v;
        node.cpt[r * n_states + s] = v;
      }
      require(std::abs(sum - 1.0) <= kSumTolerance, ErrorCode::MalformedTable,
              where + "row (" + label + ") sums to " + std::to_string(sum));
    }
    auto missing = std::find(filled.begin(), filled.end(), false);
    require(missing == filled.end(), ErrorCode::MalformedTable,
            where + "table is missing " + std::to_string(std::count(filled.begin(), filled.end(), false)) +
                " parent combination(s)");
    net.nodes_.push_back(std::move(node));
  }

  std::set<NodeIndex> keys;
  for (const auto& k : spec.key_nodes) {
    auto found = net.find(k);
    require(found.has_value(), ErrorCode::UnknownNode, "key node '" + k + "' is not declared");
    if (keys.insert(*found).second) net.key_nodes_.push_back(*found);
  }
  return net;
}

/// Validates `spec` and returns the queryable network.
/// Throws CycleDetected, DanglingEdge, MalformedTable, InvalidSpec or UnknownNode.
inline Network build_network(const NetworkSpec& spec) { return Network::build(spec); }

}  // namespace erimap::bn
