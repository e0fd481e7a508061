#pragma once
// Exact posterior marginals by variable elimination.
//
// Evidence is either hard (a node fixed to one state) or a likelihood
// vector attached to a node. A likelihood vector is the CPT column of a
// binary virtual child observed True, so it enters the computation as a
// unary factor on its parent.

#include "erimap/bn/factor.hpp"
#include "erimap/bn/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace erimap::bn {

inline constexpr double kMinEvidenceMass = 1e-300;

struct Likelihood {
  std::string node_id;
  std::vector<double> values;
};

using HardEvidence = std::map<std::string, std::string, std::less<>>;

namespace detail {

struct ResolvedEvidence {
  std::vector<std::pair<NodeIndex, std::size_t>> hard;
  std::vector<std::pair<NodeIndex, const std::vector<double>*>> likelihoods;
};

inline void check_likelihood(const Network& net, NodeIndex n, const std::vector<double>& values) {
  const auto& node = net.node(n);
  require(values.size() == node.num_states(), ErrorCode::InvalidLikelihood,
          "likelihood on '" + node.id + "' has " + std::to_string(values.size()) + " entries, expected " +
              std::to_string(node.num_states()));
  double sum = 0.0;
  for (double v : values) {
    require(std::isfinite(v) && v >= 0.0, ErrorCode::InvalidLikelihood,
            "likelihood on '" + node.id + "' has a negative or non-finite entry");
    sum += v;
  }
  require(sum > 0.0, ErrorCode::InvalidLikelihood, "likelihood on '" + node.id + "' is all zeros");
}

inline ResolvedEvidence resolve(const Network& net, const HardEvidence& hard, std::span<const Likelihood> likelihoods) {
  ResolvedEvidence out;
  for (const auto& [id, state] : hard) {
    NodeIndex n = net.index_of(id);
    out.hard.emplace_back(n, net.state_index(n, state));
  }
  for (const auto& lk : likelihoods) {
    NodeIndex n = net.index_of(lk.node_id);
    check_likelihood(net, n, lk.values);
    out.likelihoods.emplace_back(n, &lk.values);
  }
  return out;
}

inline Distribution normalized(const Network& net, NodeIndex target, std::vector<double> mass) {
  double total = 0.0;
  for (double m : mass) total += m;
  if (!(total >= kMinEvidenceMass) || !std::isfinite(total)) {
    fail(ErrorCode::ZeroProbabilityEvidence,
         "evidence has zero joint probability (query on '" + net.node(target).id + "')");
  }
  for (double& m : mass) m /= total;
  return Distribution{net.node(target).id, std::move(mass)};
}

// Picks the variable whose elimination connects the fewest other
// variables; ties go to the lexicographically smallest node id.
inline NodeIndex pick_min_degree(const Network& net, const std::vector<Factor>& factors,
                                 const std::vector<NodeIndex>& candidates) {
  NodeIndex best = candidates.front();
  std::size_t best_degree = std::numeric_limits<std::size_t>::max();
  std::vector<char> neighbour(net.size());
  for (NodeIndex v : candidates) {
    std::fill(neighbour.begin(), neighbour.end(), 0);
    for (const Factor& f : factors) {
      if (!f.contains(v)) continue;
      for (NodeIndex u : f.vars()) neighbour[u] = 1;
    }
    neighbour[v] = 0;
    auto degree = static_cast<std::size_t>(std::count(neighbour.begin(), neighbour.end(), 1));
    if (degree < best_degree || (degree == best_degree && net.node(v).id < net.node(best).id)) {
      best = v;
      best_degree = degree;
    }
  }
  return best;
}

inline Distribution eliminate(const Network& net, NodeIndex target, const ResolvedEvidence& ev) {
  std::vector<Factor> factors;
  factors.reserve(net.size() + ev.hard.size() + ev.likelihoods.size());
  for (NodeIndex n = 0; n < net.size(); ++n) factors.push_back(Factor::from_cpt(net, n));
  for (const auto& [n, s] : ev.hard) {
    std::vector<double> indicator(net.node(n).num_states(), 0.0);
    indicator[s] = 1.0;
    factors.push_back(Factor::unary(n, std::move(indicator)));
  }
  for (const auto& [n, values] : ev.likelihoods) factors.push_back(Factor::unary(n, *values));

  std::vector<NodeIndex> remaining;
  for (NodeIndex n = 0; n < net.size(); ++n) {
    if (n != target) remaining.push_back(n);
  }
  while (!remaining.empty()) {
    NodeIndex v = pick_min_degree(net, factors, remaining);
    remaining.erase(std::find(remaining.begin(), remaining.end(), v));

    Factor product;
    std::vector<Factor> rest;
    rest.reserve(factors.size());
    for (Factor& f : factors) {
      if (f.contains(v)) {
        product = product * f;
      } else {
        rest.push_back(std::move(f));
      }
    }
    rest.push_back(product.sum_out(v));
    factors = std::move(rest);
  }

  Factor result;
  for (const Factor& f : factors) result = result * f;
  return normalized(net, target, result.values());
}

}  // namespace detail

/// Exact posterior marginal of `target` given hard evidence and attached
/// likelihood vectors.
/// Throws UnknownNode, InvalidState, InvalidLikelihood, ZeroProbabilityEvidence.
inline Distribution query(const Network& net, std::string_view target, const HardEvidence& hard,
                          std::span<const Likelihood> likelihoods) {
  NodeIndex t = net.index_of(target);
  return detail::eliminate(net, t, detail::resolve(net, hard, likelihoods));
}

inline Distribution query(const Network& net, std::string_view target) { return query(net, target, {}, {}); }

/// Posterior marginals of every node, in declaration order.
inline std::vector<Distribution> marginals(const Network& net, const HardEvidence& hard,
                                           std::span<const Likelihood> likelihoods) {
  auto ev = detail::resolve(net, hard, likelihoods);
  std::vector<Distribution> out;
  out.reserve(net.size());
  for (NodeIndex n = 0; n < net.size(); ++n) out.push_back(detail::eliminate(net, n, ev));
  return out;
}

}  // namespace erimap::bn
