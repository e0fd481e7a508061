#include "erimap/bn/inference.hpp"
#include "erimap/evidence.hpp"
#include "support/expect_code.hpp"
#include "support/henkel.hpp"
#include "support/random_network.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace erimap;
using evidence::EvidenceConfig;
using evidence::ReliabilityScore;
using evidence::RegretPolicy;

namespace {

const bn::Network& net() { return *fixture::henkel().network; }

const bn::Network::Node& node(const char* id) { return net().node(net().index_of(id)); }

EvidenceConfig paper_config(double theta = 0.1) {
  return {evidence::make_reliability_table({{"RS1", 0.7}, {"RS2", 0.8}, {"RS3", 1.0}}), {theta}};
}

Observation make_obs(const std::string& node_id, Tier tier, Payload payload) {
  Observation o;
  o.id = "o";
  o.location = Location::of({"17"});
  o.node_id = node_id;
  o.tier = tier;
  o.payload = std::move(payload);
  return o;
}

void expect_vec_near(const std::vector<double>& got, const std::vector<double>& want, double tol) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], tol) << "index " << i;
}

}  // namespace

TEST(Unambiguous, BinaryReportFromSecondTier) {
  // Time of Day has no critical state, so no regret.
  auto l = evidence::unambiguous_to_likelihood({Tier::RS2, 0.8}, node("Time of Day"), "6am-6pm", {0.1});
  expect_vec_near(l, {0.8, 0.2}, 1e-15);
}

TEST(Unambiguous, FourStateReportSpreadsTheRemainder) {
  bn::NetworkSpec s;
  s.nodes = {{"Use", {"a", "b", "c", "d"}, {{}, {{{}, {0.25, 0.25, 0.25, 0.25}}}}, {}}};
  auto four = bn::build_network(s);
  auto l = evidence::unambiguous_to_likelihood({Tier::RS1, 0.7}, four.node(0), "a", {0.1});
  expect_vec_near(l, {0.7, 0.1, 0.1, 0.1}, 1e-15);
}

TEST(Unambiguous, RegretBoostsCriticalStateOnly) {
  auto t = evidence::unambiguous_to_likelihood({Tier::RS1, 0.7}, node(fixture::kPeople), "True", {0.1});
  expect_vec_near(t, {0.8, 0.2}, 1e-15);
  auto f = evidence::unambiguous_to_likelihood({Tier::RS1, 0.7}, node(fixture::kPeople), "False", {0.1});
  expect_vec_near(f, {0.3, 0.7}, 1e-15);
}

TEST(Unambiguous, RegretIsClippedBelowOne) {
  auto l = evidence::unambiguous_to_likelihood({Tier::RS2, 0.95}, node(fixture::kPeople), "True", {0.1});
  EXPECT_DOUBLE_EQ(l[0], evidence::kLikelihoodCeiling);
  EXPECT_NEAR(l[0] + l[1], 1.0, 1e-15);
}

TEST(Unambiguous, NoRegretWhenEveryStateIsCritical) {
  bn::NetworkSpec s;
  s.nodes = {{"X", {"a", "b"}, {{}, {{{}, {0.5, 0.5}}}}, {"a", "b"}}};
  auto all_critical = bn::build_network(s);
  auto l = evidence::unambiguous_to_likelihood({Tier::RS1, 0.7}, all_critical.node(0), "a", {0.1});
  expect_vec_near(l, {0.7, 0.3}, 1e-15);
}

TEST(Unambiguous, UnknownState) {
  EXPECT_CODE((void)evidence::unambiguous_to_likelihood({Tier::RS1, 0.7}, node(fixture::kPeople), "Maybe", {0.1}),
              ErrorCode::UnknownState);
}

TEST(Reliability, TableValidation) {
  EXPECT_CODE((void)evidence::make_reliability_table({{"RS4", 0.9}}), ErrorCode::UnknownTier);
  EXPECT_CODE((void)evidence::make_reliability_table({{"RS1", 0.5}}), ErrorCode::InvalidReliability);
  EXPECT_CODE((void)evidence::make_reliability_table({{"RS1", 1.2}}), ErrorCode::InvalidReliability);
  EXPECT_CODE(evidence::validate(RegretPolicy{0.5}), ErrorCode::InvalidReliability);
  EXPECT_CODE(evidence::validate(RegretPolicy{-0.1}), ErrorCode::InvalidReliability);
  auto table = evidence::make_reliability_table({{"RS1", 0.7}, {"RS3", 1.0}});
  EXPECT_EQ(table.size(), 2u);
  EXPECT_DOUBLE_EQ(table.at(Tier::RS1).likelihood, 0.7);
}

TEST(Classify, TopTierStateIsHard) {
  auto ev = evidence::classify(make_obs(fixture::kPeople, Tier::RS3, UnambiguousState{"False"}), paper_config(), net());
  ASSERT_TRUE(std::holds_alternative<evidence::Hard>(ev.kind));
  EXPECT_EQ(std::get<evidence::Hard>(ev.kind).state, "False");
}

TEST(Classify, TopTierBelowCertaintyIsVirtualWithoutRegret) {
  auto cfg = paper_config();
  cfg.reliability[Tier::RS3].likelihood = 0.95;
  auto ev = evidence::classify(make_obs(fixture::kPeople, Tier::RS3, UnambiguousState{"True"}), cfg, net());
  ASSERT_TRUE(std::holds_alternative<evidence::Virtual>(ev.kind));
  expect_vec_near(std::get<evidence::Virtual>(ev.kind).likelihood, {0.95, 0.05}, 1e-15);
}

TEST(Classify, LowTierStateIsVirtual) {
  auto ev = evidence::classify(make_obs(fixture::kPeople, Tier::RS2, UnambiguousState{"True"}), paper_config(), net());
  ASSERT_TRUE(std::holds_alternative<evidence::Virtual>(ev.kind));
  expect_vec_near(std::get<evidence::Virtual>(ev.kind).likelihood, {0.9, 0.1}, 1e-15);
}

TEST(Classify, ProbabilityRatioIsSoft) {
  auto ev = evidence::classify(make_obs(fixture::kAround, Tier::RS3, ProbRatio{{0.8, 0.2}}), paper_config(), net());
  ASSERT_TRUE(std::holds_alternative<evidence::Soft>(ev.kind));
  EXPECT_EQ(std::get<evidence::Soft>(ev.kind).ratio, (std::vector<double>{0.8, 0.2}));
}

TEST(Classify, LikelihoodRatioIsVirtualVerbatim) {
  auto ev = evidence::classify(make_obs(fixture::kInside, Tier::RS3, LikelihoodRatio{{0.9, 0.1}}), paper_config(), net());
  ASSERT_TRUE(std::holds_alternative<evidence::Virtual>(ev.kind));
  EXPECT_EQ(std::get<evidence::Virtual>(ev.kind).likelihood, (std::vector<double>{0.9, 0.1}));
}

TEST(Classify, Rejections) {
  auto cfg = paper_config();
  EXPECT_CODE((void)evidence::classify(make_obs(fixture::kInside, Tier::RS1, LikelihoodRatio{{0.9, 0.1}}), cfg, net()),
              ErrorCode::AmbiguousPayloadFromLowTier);
  EXPECT_CODE((void)evidence::classify(make_obs(fixture::kAround, Tier::RS2, ProbRatio{{0.8, 0.2}}), cfg, net()),
              ErrorCode::AmbiguousPayloadFromLowTier);
  EXPECT_CODE((void)evidence::classify(make_obs("Weather", Tier::RS3, UnambiguousState{"Rain"}), cfg, net()),
              ErrorCode::UnknownNode);
  EXPECT_CODE((void)evidence::classify(make_obs(fixture::kPeople, Tier::RS3, UnambiguousState{"Maybe"}), cfg, net()),
              ErrorCode::UnknownState);
  EXPECT_CODE((void)evidence::classify(make_obs(fixture::kInside, Tier::RS3, LikelihoodRatio{{0.9, 0.1, 0.0}}), cfg, net()),
              ErrorCode::InvalidLikelihood);
  EXPECT_CODE((void)evidence::classify(make_obs(fixture::kAround, Tier::RS3, ProbRatio{{0.8, 0.3}}), cfg, net()),
              ErrorCode::InvalidLikelihood);
  EXPECT_CODE((void)evidence::classify(make_obs(fixture::kInside, Tier::RS3, LikelihoodRatio{{0.0, 0.0}}), cfg, net()),
              ErrorCode::InvalidLikelihood);
  cfg.reliability.erase(Tier::RS2);
  EXPECT_CODE((void)evidence::classify(make_obs(fixture::kPeople, Tier::RS2, UnambiguousState{"True"}), cfg, net()),
              ErrorCode::UnknownTier);
}

TEST(SoftEvidence, PaperCaseReachesTargetExactly) {
  const auto prior = bn::query(net(), fixture::kAround);
  expect_vec_near(prior.probs, {0.01, 0.99}, 1e-15);
  auto lk = evidence::soft_to_virtual({0.8, 0.2}, prior);
  std::vector<bn::Likelihood> liks{{fixture::kAround, lk}};
  expect_vec_near(bn::query(net(), fixture::kAround, {}, liks).probs, {0.8, 0.2}, 1e-12);
}

TEST(SoftEvidence, ZeroPriorState) {
  bn::Distribution prior{"X", {0.0, 1.0}};
  EXPECT_CODE((void)evidence::soft_to_virtual({0.5, 0.5}, prior), ErrorCode::ZeroPriorState);
  expect_vec_near(evidence::soft_to_virtual({0.0, 1.0}, prior), {0.0, 1.0}, 0.0);
}

TEST(SoftEvidence, RandomRoundTrips) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    auto net = bn::build_network(fixture::random_network_spec(rng));
    std::uniform_int_distribution<std::size_t> pick(0, net.size() - 1);
    const auto& n = net.node(pick(rng));
    const auto prior = bn::query(net, n.id);
    const auto target = fixture::random_simplex(rng, n.states.size(), 1e-4);
    std::vector<bn::Likelihood> liks{{n.id, evidence::soft_to_virtual(target, prior)}};
    expect_vec_near(bn::query(net, n.id, {}, liks).probs, target, 1e-9);
  }
}

TEST(Regret, ConflictingPairFavoursTheCriticalReport) {
  auto cfg = paper_config(0.1);
  auto f = evidence::classify(make_obs(fixture::kPeople, Tier::RS1, UnambiguousState{"False"}), cfg, net());
  auto t = evidence::classify(make_obs(fixture::kPeople, Tier::RS1, UnambiguousState{"True"}), cfg, net());
  const auto& lf = std::get<evidence::Virtual>(f.kind).likelihood;
  const auto& lt = std::get<evidence::Virtual>(t.kind).likelihood;
  const std::vector<double> combined{lf[0] * lt[0], lf[1] * lt[1]};
  expect_vec_near(evidence::normalize(combined), {0.24 / 0.38, 0.14 / 0.38}, 1e-12);

  bn::HardEvidence day_production{{"Time of Day", "6am-6pm"}, {"Building Type", "Production"}};
  std::vector<bn::Likelihood> pair{{fixture::kPeople, lf}, {fixture::kPeople, lt}};
  const double before = bn::query(net(), fixture::kPeople, day_production, {}).probs[0];
  const double after = bn::query(net(), fixture::kPeople, day_production, pair).probs[0];
  EXPECT_GT(after, before);
  EXPECT_NEAR(after, 0.93913043478260871, 1e-12);
}

TEST(Regret, ConflictingPairCancelsWithoutRegret) {
  auto cfg = paper_config(0.0);
  auto f = evidence::classify(make_obs(fixture::kPeople, Tier::RS1, UnambiguousState{"False"}), cfg, net());
  auto t = evidence::classify(make_obs(fixture::kPeople, Tier::RS1, UnambiguousState{"True"}), cfg, net());
  std::vector<bn::Likelihood> pair{{fixture::kPeople, std::get<evidence::Virtual>(f.kind).likelihood},
                                   {fixture::kPeople, std::get<evidence::Virtual>(t.kind).likelihood}};
  const auto before = bn::marginals(net(), {}, {});
  const auto after = bn::marginals(net(), {}, pair);
  for (std::size_t i = 0; i < before.size(); ++i) expect_vec_near(after[i].probs, before[i].probs, 1e-12);
}
