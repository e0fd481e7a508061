#include "erimap/bn/enumeration.hpp"
#include "erimap/bn/inference.hpp"
#include "erimap/bn/spec_json.hpp"
#include "support/expect_code.hpp"
#include "support/henkel.hpp"
#include "support/random_network.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace erimap;

namespace {

double max_abs_diff(const bn::Distribution& a, const bn::Distribution& b) {
  EXPECT_EQ(a.probs.size(), b.probs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.probs.size(); ++i) d = std::max(d, std::abs(a.probs[i] - b.probs[i]));
  return d;
}

// Rain -> WetGrass <- Sprinkler, textbook numbers.
bn::Network sprinkler() {
  bn::NetworkSpec s;
  s.nodes = {
      {"Rain", {"T", "F"}, {{}, {{{}, {0.2, 0.8}}}}, {}},
      {"Sprinkler", {"T", "F"}, {{}, {{{}, {0.1, 0.9}}}}, {}},
      {"WetGrass",
       {"T", "F"},
       {{"Rain", "Sprinkler"},
        {{{"T", "T"}, {0.99, 0.01}}, {{"T", "F"}, {0.8, 0.2}}, {{"F", "T"}, {0.9, 0.1}}, {{"F", "F"}, {0.0, 1.0}}}},
       {}},
  };
  s.edges = {{"Rain", "WetGrass"}, {"Sprinkler", "WetGrass"}};
  s.key_nodes = {"WetGrass"};
  return bn::build_network(s);
}

const bn::Network& henkel_net() { return *fixture::henkel().network; }

}  // namespace

TEST(Inference, PriorMarginalOfCollider) {
  auto net = sprinkler();
  auto d = bn::query(net, "WetGrass");
  const double wet = 0.2 * 0.1 * 0.99 + 0.2 * 0.9 * 0.8 + 0.8 * 0.1 * 0.9;
  EXPECT_NEAR(d.probs[0], wet, 1e-15);
  EXPECT_NEAR(d.probs[0] + d.probs[1], 1.0, 1e-15);
}

TEST(Inference, ExplainingAway) {
  auto net = sprinkler();
  auto rain_given_wet = bn::query(net, "Rain", {{"WetGrass", "T"}}, {});
  auto rain_given_wet_sprinkler = bn::query(net, "Rain", {{"WetGrass", "T"}, {"Sprinkler", "T"}}, {});
  EXPECT_LT(rain_given_wet_sprinkler.probs[0], rain_given_wet.probs[0]);
  const double num = 0.2 * (0.1 * 0.99 + 0.9 * 0.8);
  const double den = num + 0.8 * 0.1 * 0.9;
  EXPECT_NEAR(rain_given_wet.probs[0], num / den, 1e-15);
}

TEST(Inference, HardEvidenceOnTargetIsOneHot) {
  auto net = sprinkler();
  auto d = bn::query(net, "Rain", {{"Rain", "F"}}, {});
  EXPECT_EQ(d.probs, (std::vector<double>{0.0, 1.0}));
}

TEST(Inference, ZeroProbabilityEvidence) {
  auto net = sprinkler();
  EXPECT_CODE((void)bn::query(net, "Rain", {{"WetGrass", "T"}, {"Rain", "F"}, {"Sprinkler", "F"}}, {}),
              ErrorCode::ZeroProbabilityEvidence);
  std::vector<bn::Likelihood> zero{{"Rain", {0.0, 0.0}}};
  EXPECT_CODE((void)bn::query(net, "WetGrass", {}, zero), ErrorCode::InvalidLikelihood);
}

TEST(Inference, LikelihoodValidation) {
  auto net = sprinkler();
  std::vector<bn::Likelihood> wrong_len{{"Rain", {0.5}}};
  EXPECT_CODE((void)bn::query(net, "WetGrass", {}, wrong_len), ErrorCode::InvalidLikelihood);
  std::vector<bn::Likelihood> negative{{"Rain", {-0.1, 1.0}}};
  EXPECT_CODE((void)bn::query(net, "WetGrass", {}, negative), ErrorCode::InvalidLikelihood);
  std::vector<bn::Likelihood> unknown{{"Snow", {0.5, 0.5}}};
  EXPECT_CODE((void)bn::query(net, "WetGrass", {}, unknown), ErrorCode::UnknownNode);
  EXPECT_CODE((void)bn::query(net, "WetGrass", {{"Rain", "Maybe"}}, {}), ErrorCode::InvalidState);
  EXPECT_CODE((void)bn::query(net, "Snow"), ErrorCode::UnknownNode);
}

TEST(Inference, VirtualEvidenceEqualsVirtualChild) {
  // A likelihood vector on Rain is the same as hard evidence on a child
  // whose CPT column is that vector.
  auto net = sprinkler();
  std::vector<bn::Likelihood> lk{{"Rain", {0.9, 0.3}}};
  auto direct = bn::query(net, "WetGrass", {}, lk);

  auto spec = net.spec();
  spec.nodes.push_back({"Report", {"yes", "no"}, {{"Rain"}, {{{"T"}, {0.9, 0.1}}, {{"F"}, {0.3, 0.7}}}}, {}});
  spec.edges.push_back({"Rain", "Report"});
  auto augmented = bn::build_network(spec);
  auto via_child = bn::query(augmented, "WetGrass", {{"Report", "yes"}}, {});
  EXPECT_LT(max_abs_diff(direct, via_child), 1e-15);
}

TEST(Inference, MatchesEnumerationOnRandomNetworks) {
  std::mt19937_64 rng(20240603);
  for (int trial = 0; trial < 150; ++trial) {
    auto net = bn::build_network(fixture::random_network_spec(rng));
    auto ev = fixture::random_evidence(rng, net);
    for (const auto& node : net.nodes()) {
      auto fast = bn::query(net, node.id, ev.hard, ev.likelihoods);
      auto slow = bn::enumerate_joint(net, node.id, ev.hard, ev.likelihoods);
      ASSERT_LT(max_abs_diff(fast, slow), 1e-9) << "trial " << trial << " node " << node.id;
    }
  }
}

TEST(Inference, MarginalsCoverEveryNode) {
  auto net = sprinkler();
  auto all = bn::marginals(net, {{"WetGrass", "T"}}, {});
  ASSERT_EQ(all.size(), net.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    EXPECT_EQ(all[i].node_id, net.node(i).id);
    EXPECT_EQ(all[i], bn::query(net, net.node(i).id, {{"WetGrass", "T"}}, {}));
  }
}

TEST(Inference, UniformLikelihoodChangesNothing) {
  const auto& net = henkel_net();
  std::vector<bn::Likelihood> uniform;
  for (const auto& node : net.nodes()) uniform.push_back({node.id, std::vector<double>(node.states.size(), 0.37)});
  const auto before = bn::marginals(net, {}, {});
  const auto after = bn::marginals(net, {}, uniform);
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_LT(max_abs_diff(before[i], after[i]), 1e-12);
}

TEST(Inference, EvidenceOrderDoesNotMatter) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    auto net = bn::build_network(fixture::random_network_spec(rng));
    auto ev = fixture::random_evidence(rng, net);
    auto shuffled = ev.likelihoods;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    for (const auto& node : net.nodes()) {
      EXPECT_LT(max_abs_diff(bn::query(net, node.id, ev.hard, ev.likelihoods), bn::query(net, node.id, ev.hard, shuffled)),
                1e-12);
    }
  }
}

TEST(Inference, CaseStudyPriorAnchors) {
  const auto& net = henkel_net();
  bn::HardEvidence day_production{{"Time of Day", "6am-6pm"}, {"Building Type", "Production"}};
  EXPECT_NEAR(bn::query(net, fixture::kPeople, day_production, {}).probs[0], 0.9, 1e-12);
  EXPECT_NEAR(bn::query(net, fixture::kInside, day_production, {}).probs[0], 0.057, 1e-12);
  EXPECT_NEAR(bn::query(net, fixture::kAffected, day_production, {}).probs[0], 0.134776, 1e-12);
}

TEST(Enumeration, RefusesHugeStateSpaces) {
  bn::NetworkSpec s;
  std::vector<std::string> states;
  for (int i = 0; i < 10; ++i) states.push_back("s" + std::to_string(i));
  for (int i = 0; i < 8; ++i) {
    s.nodes.push_back({"N" + std::to_string(i), states, {{}, {{{}, std::vector<double>(10, 0.1)}}}, {}});
  }
  auto net = bn::build_network(s);
  EXPECT_CODE((void)bn::enumerate_joint(net, "N0", {}, {}), ErrorCode::StateSpaceTooLarge);
  EXPECT_NEAR(bn::query(net, "N0").probs[3], 0.1, 1e-15);
}
