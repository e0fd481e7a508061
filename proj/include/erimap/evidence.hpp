#pragma once
// Turning observations into findings the network can condition on.
//
//   Hard     a node fixed to one state
//   Soft     a target distribution for a node (probability ratio)
//   Virtual  a likelihood vector, i.e. the CPT column of a binary
//            observation child conditioned True
//
// An unambiguous report from a source of limited reliability becomes
// virtual evidence: the reported state gets the tier's likelihood p and
// the remaining mass is spread evenly, (p, (1-p)/(N-1), ...). When the
// reported state is one of the node's critical states, p is raised by the
// regret margin theta so that two opposite reports of equal reliability
// lean toward the more critical outcome instead of cancelling.

#include "erimap/bn/network.hpp"
#include "erimap/error.hpp"
#include "erimap/observation.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace erimap::evidence {

inline constexpr double kLikelihoodCeiling = 1.0 - 1e-6;

struct ReliabilityScore {
  Tier tier = Tier::RS1;
  double likelihood = 1.0;  // in (0.5, 1]
};

using ReliabilityTable = std::map<Tier, ReliabilityScore>;

struct RegretPolicy {
  double theta = 0.0;  // in [0, 0.5)
};

struct EvidenceConfig {
  ReliabilityTable reliability;
  RegretPolicy regret;
};

inline void validate(const ReliabilityScore& rs) {
  require(std::isfinite(rs.likelihood) && rs.likelihood > 0.5 && rs.likelihood <= 1.0, ErrorCode::InvalidReliability,
          std::string(to_string(rs.tier)) + " likelihood must lie in (0.5, 1]");
}

inline void validate(const RegretPolicy& policy) {
  require(std::isfinite(policy.theta) && policy.theta >= 0.0 && policy.theta < 0.5, ErrorCode::InvalidReliability,
          "theta must lie in [0, 0.5)");
}

/// Builds a table from tier name → likelihood, e.g. {"RS1": 0.7, "RS2": 0.8, "RS3": 1.0}.
inline ReliabilityTable make_reliability_table(const std::map<std::string, double>& by_name) {
  ReliabilityTable table;
  for (const auto& [name, p] : by_name) {
    auto tier = parse_tier(name);
    require(tier.has_value(), ErrorCode::UnknownTier, "unknown reliability tier '" + name + "'");
    ReliabilityScore rs{*tier, p};
    validate(rs);
    table[*tier] = rs;
  }
  return table;
}

struct Hard {
  std::string state;
  friend bool operator==(const Hard&, const Hard&) = default;
};
struct Soft {
  std::vector<double> ratio;
  friend bool operator==(const Soft&, const Soft&) = default;
};
struct Virtual {
  std::vector<double> likelihood;
  friend bool operator==(const Virtual&, const Virtual&) = default;
};

struct Evidence {
  std::string node_id;
  std::string origin;  // observation id
  std::variant<Hard, Soft, Virtual> kind;

  friend bool operator==(const Evidence&, const Evidence&) = default;
};

inline bool regret_applies(const ReliabilityScore& rs, const bn::Network::Node& node, std::size_t observed,
                           const RegretPolicy& policy) {
  if (policy.theta <= 0.0 || rs.tier == Tier::RS3) return false;
  const auto critical = static_cast<std::size_t>(std::count(node.critical.begin(), node.critical.end(), true));
  return critical > 0 && critical < node.num_states() && node.critical[observed];
}

/// Likelihood vector for an unambiguous report that `node` is in `observed_state`.
/// Throws UnknownState, DegenerateNode.
inline std::vector<double> unambiguous_to_likelihood(const ReliabilityScore& rs, const bn::Network::Node& node,
                                                     std::string_view observed_state, const RegretPolicy& policy) {
  const std::size_t n = node.num_states();
  require(n >= 2, ErrorCode::DegenerateNode, "node '" + node.id + "' has fewer than 2 states");
  auto it = std::find(node.states.begin(), node.states.end(), observed_state);
  require(it != node.states.end(), ErrorCode::UnknownState,
          "node '" + node.id + "' has no state '" + std::string(observed_state) + "'");
  const auto observed = static_cast<std::size_t>(it - node.states.begin());

  double p = rs.likelihood;
  if (regret_applies(rs, node, observed, policy)) {
    p += policy.theta;
    if (p > kLikelihoodCeiling) {
      spdlog::warn("regret boost on '{}' clipped from {} to {}", node.id, p, kLikelihoodCeiling);
      p = kLikelihoodCeiling;
    }
  }
  std::vector<double> out(n, (1.0 - p) / static_cast<double>(n - 1));
  out[observed] = p;
  return out;
}

/// Scales `values` to sum to one.
inline std::vector<double> normalize(std::vector<double> values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  require(sum > 0.0 && std::isfinite(sum), ErrorCode::InvalidLikelihood, "cannot normalize a zero vector");
  for (double& v : values) v /= sum;
  return values;
}

inline void validate_probability_ratio(const std::vector<double>& ratio, const std::string& node_id) {
  double sum = 0.0;
  for (double v : ratio) {
    require(std::isfinite(v) && v >= 0.0 && v <= 1.0, ErrorCode::InvalidLikelihood,
            "probability ratio on '" + node_id + "' has an entry outside [0, 1]");
    sum += v;
  }
  require(std::abs(sum - 1.0) <= bn::kSumTolerance, ErrorCode::InvalidLikelihood,
          "probability ratio on '" + node_id + "' sums to " + std::to_string(sum));
}

inline void validate_likelihood_ratio(const std::vector<double>& lr, const std::string& node_id) {
  double sum = 0.0;
  for (double v : lr) {
    require(std::isfinite(v) && v >= 0.0, ErrorCode::InvalidLikelihood,
            "likelihood ratio on '" + node_id + "' has a negative or non-finite entry");
    sum += v;
  }
  require(sum > 0.0, ErrorCode::InvalidLikelihood, "likelihood ratio on '" + node_id + "' is all zeros");
}

/// Virtual-evidence vector whose sole application moves the node's
/// marginal from `prior` to `ratio`: normalize(ratio_i / prior_i).
/// Throws ZeroPriorState where ratio_i > 0 but prior_i = 0.
inline std::vector<double> soft_to_virtual(const std::vector<double>& ratio, const bn::Distribution& prior) {
  require(ratio.size() == prior.probs.size(), ErrorCode::InvalidLikelihood,
          "probability ratio on '" + prior.node_id + "' has " + std::to_string(ratio.size()) + " entries, expected " +
              std::to_string(prior.probs.size()));
  validate_probability_ratio(ratio, prior.node_id);
  std::vector<double> out(ratio.size(), 0.0);
  for (std::size_t i = 0; i < ratio.size(); ++i) {
    if (ratio[i] == 0.0) continue;
    require(prior.probs[i] > 0.0, ErrorCode::ZeroPriorState,
            "node '" + prior.node_id + "' state " + std::to_string(i) + " has zero prior but positive target");
    out[i] = ratio[i] / prior.probs[i];
  }
  return normalize(std::move(out));
}

/// Routes an observation to hard, soft or virtual evidence based on the
/// source tier and the payload.
/// Throws UnknownNode, UnknownTier, UnknownState, InvalidLikelihood,
/// AmbiguousPayloadFromLowTier.
inline Evidence classify(const Observation& obs, const EvidenceConfig& config, const bn::Network& net) {
  const bn::NodeIndex n = net.index_of(obs.node_id);
  const auto& node = net.node(n);
  auto rs_it = config.reliability.find(obs.tier);
  require(rs_it != config.reliability.end(), ErrorCode::UnknownTier,
          "no reliability score configured for tier " + std::string(to_string(obs.tier)));
  const ReliabilityScore& rs = rs_it->second;
  const bool low_tier = obs.tier != Tier::RS3;

  auto check_length = [&](const std::vector<double>& v, const char* what) {
    require(v.size() == node.num_states(), ErrorCode::InvalidLikelihood,
            std::string(what) + " on '" + node.id + "' has " + std::to_string(v.size()) + " entries, expected " +
                std::to_string(node.num_states()));
  };

  return std::visit(
      [&](const auto& payload) -> Evidence {
        using P = std::decay_t<decltype(payload)>;
        if constexpr (std::is_same_v<P, UnambiguousState>) {
          require(net.find_state(n, payload.state).has_value(), ErrorCode::UnknownState,
                  "node '" + node.id + "' has no state '" + payload.state + "'");
          if (!low_tier && rs.likelihood >= 1.0) return Evidence{node.id, obs.id, Hard{payload.state}};
          return Evidence{node.id, obs.id, Virtual{unambiguous_to_likelihood(rs, node, payload.state, config.regret)}};
        } else {
          require(!low_tier, ErrorCode::AmbiguousPayloadFromLowTier,
                  "tier " + std::string(to_string(obs.tier)) + " sources may only report a single state");
          if constexpr (std::is_same_v<P, ProbRatio>) {
            check_length(payload.values, "probability ratio");
            validate_probability_ratio(payload.values, node.id);
            return Evidence{node.id, obs.id, Soft{payload.values}};
          } else {
            check_length(payload.values, "likelihood ratio");
            validate_likelihood_ratio(payload.values, node.id);
            return Evidence{node.id, obs.id, Virtual{payload.values}};
          }
        }
      },
      obs.payload);
}

}  // namespace erimap::evidence
