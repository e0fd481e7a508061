#pragma once
// Posterior by exhaustive summation over the full joint distribution.
// Used as the independent reference for `query`; it shares only input
// validation with the elimination path.

#include "erimap/bn/inference.hpp"
#include "erimap/bn/network.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace erimap::bn {

inline constexpr std::uint64_t kMaxJointStates = 10'000'000;

/// Same contract as `query`. Throws StateSpaceTooLarge when the joint has
/// more than 10^7 configurations.
inline Distribution enumerate_joint(const Network& net, std::string_view target, const HardEvidence& hard,
                                    std::span<const Likelihood> likelihoods) {
  const NodeIndex t = net.index_of(target);
  const auto ev = detail::resolve(net, hard, likelihoods);

  std::uint64_t space = 1;
  for (const auto& node : net.nodes()) {
    space *= node.num_states();
    require(space <= kMaxJointStates, ErrorCode::StateSpaceTooLarge,
            "joint state space exceeds " + std::to_string(kMaxJointStates) + " configurations");
  }

  const std::size_t n = net.size();
  std::vector<std::size_t> assign(n, 0);
  std::vector<double> mass(net.node(t).num_states(), 0.0);
  for (std::uint64_t c = 0; c < space; ++c) {
    double p = 1.0;
    for (const auto& [node, state] : ev.hard) {
      if (assign[node] != state) p = 0.0;
    }
    if (p != 0.0) {
      for (NodeIndex i = 0; i < n; ++i) p *= net.conditional(i, assign[i], assign);
      for (const auto& [node, values] : ev.likelihoods) p *= (*values)[assign[node]];
      mass[assign[t]] += p;
    }
    for (std::size_t k = n; k-- > 0;) {
      if (++assign[k] < net.node(k).num_states()) break;
      assign[k] = 0;
    }
  }
  return detail::normalized(net, t, std::move(mass));
}

}  // namespace erimap::bn
