#include "erimap/bn/enumeration.hpp"
#include "erimap/export.hpp"
#include "erimap/pipeline.hpp"
#include "support/expect_code.hpp"
#include "support/henkel.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace erimap;
using pipeline::Engine;

namespace {

Timestamp at_minute(int m) { return *parse_timestamp("2024-06-03T00:00:00Z") + std::chrono::minutes(m); }

Observation make_obs(const std::string& id, int minute, std::vector<std::string> areas, const std::string& node,
                     Tier tier, Payload payload) {
  Observation o;
  o.id = id;
  o.time = at_minute(minute);
  o.location = Location::of(std::move(areas));
  o.node_id = node;
  o.tier = tier;
  o.payload = std::move(payload);
  return o;
}

Engine henkel_engine() { return bundle::make_engine(fixture::henkel()); }

double affected(const Engine& e, const std::string& area) {
  const auto& net = e.network();
  return e.current_beliefs(area)[net.index_of(fixture::kAffected)].probs[0];
}

// Two-node network: Leak -> Alarm, both binary, Leak is the key node.
bn::NetworkSpec leak_spec() {
  bn::NetworkSpec s;
  s.nodes = {{"Leak", {"T", "F"}, {{}, {{{}, {0.1, 0.9}}}}, {"T"}},
             {"Alarm", {"T", "F"}, {{"Leak"}, {{{"T"}, {0.9, 0.1}}, {{"F"}, {0.05, 0.95}}}}, {"T"}}};
  s.edges = {{"Leak", "Alarm"}};
  s.key_nodes = {"Leak"};
  return s;
}

Engine leak_engine(std::vector<std::string> ids, bn::NetworkSpec spec = leak_spec()) {
  std::vector<spatial::Area> areas;
  double x = 0;
  for (auto& id : ids) {
    areas.push_back({id, geometry::make_polygon({{{x, 0}, {x + 1, 0}, {x + 1, 1}, {x, 1}, {x, 0}}}, id), {}});
    x += 2;
  }
  evidence::EvidenceConfig cfg{evidence::make_reliability_table({{"RS1", 0.7}, {"RS2", 0.8}, {"RS3", 1.0}}), {0.1}};
  return Engine(std::make_shared<const bn::Network>(bn::build_network(spec)), std::move(areas), cfg);
}

}  // namespace

TEST(Engine, StartsWithOnePriorSnapshotPerArea) {
  auto e = henkel_engine();
  ASSERT_EQ(e.timeline().size(), 27u);
  for (const auto& s : e.timeline()) {
    EXPECT_EQ(s.seq, 0u);
    EXPECT_EQ(s.step, 0u);
    EXPECT_FALSE(s.time.has_value());
    EXPECT_TRUE(s.trigger.empty());
    ASSERT_EQ(s.marginals.size(), 1u);
    EXPECT_EQ(s.marginals[0].node_id, fixture::kAffected);
  }
  EXPECT_FALSE(e.halted());
}

TEST(Engine, TableThreeSequenceOnBuildingSeventeen) {
  auto e = henkel_engine();
  const auto script = fixture::henkel_script("table3.ndjson");
  const auto& net = e.network();
  auto p = [&](const char* node) { return e.current_beliefs("17")[net.index_of(node)].probs[0]; };

  e.ingest(script[0]);
  e.ingest(script[1]);
  EXPECT_NEAR(p(fixture::kAffected), 0.134776, 1e-12);
  EXPECT_NEAR(p(fixture::kPeople), 0.9, 1e-12);
  EXPECT_NEAR(p(fixture::kInside), 0.057, 1e-12);
  e.ingest(script[2]);
  EXPECT_NEAR(p(fixture::kAffected), 0.55948, 1e-12);
  EXPECT_NEAR(p(fixture::kInside), 0.61, 1e-12);
  e.ingest(script[3]);
  e.ingest(script[4]);
  EXPECT_NEAR(p(fixture::kPeople), 0.93913043478260871, 1e-12);
  e.ingest(script[5]);
  e.ingest(script[6]);
  EXPECT_NEAR(p(fixture::kInside), 0.9921686746987952, 1e-12);
  EXPECT_NEAR(p(fixture::kAffected), 0.88834295442640124, 1e-9);

  const auto& st = e.area_state("17");
  const auto liks = st.likelihoods();
  auto oracle = bn::enumerate_joint(net, fixture::kAffected, st.hard, liks);
  EXPECT_NEAR(p(fixture::kAffected), oracle.probs[0], 1e-12);
  EXPECT_EQ(e.area_timeline("17").size(), 8u);
  EXPECT_EQ(e.area_timeline("16").size(), 1u);
}

TEST(Engine, UnknownAreaLeavesEngineUntouched) {
  auto e = henkel_engine();
  const auto before = e.timeline();
  EXPECT_CODE(e.ingest(make_obs("x", 0, {"17", "99"}, fixture::kPeople, Tier::RS3, UnambiguousState{"True"})),
              ErrorCode::UnknownArea);
  EXPECT_EQ(e.timeline(), before);
  EXPECT_EQ(e.step(), 0u);
  EXPECT_CODE((void)e.area_state("99"), ErrorCode::UnknownArea);
}

TEST(Engine, RepeatedHardEvidenceIsIdempotent) {
  auto e = henkel_engine();
  e.ingest(make_obs("a", 0, {"3"}, fixture::kPeople, Tier::RS3, UnambiguousState{"True"}));
  const auto once = e.current_beliefs("3");
  e.ingest(make_obs("b", 1, {"3"}, fixture::kPeople, Tier::RS3, UnambiguousState{"True"}));
  EXPECT_EQ(e.current_beliefs("3"), once);
  EXPECT_EQ(e.area_timeline("3").back().marginals, e.area_timeline("3")[1].marginals);
}

TEST(Engine, ContradictingHardEvidenceIsRejected) {
  auto e = henkel_engine();
  e.ingest(make_obs("a", 0, {"3"}, fixture::kPeople, Tier::RS3, UnambiguousState{"True"}));
  const auto states = e.area_states();
  const auto timeline = e.timeline();
  EXPECT_CODE(e.ingest(make_obs("b", 1, {"3"}, fixture::kPeople, Tier::RS3, UnambiguousState{"False"})),
              ErrorCode::HardEvidenceConflict);
  EXPECT_EQ(e.area_states(), states);
  EXPECT_EQ(e.timeline(), timeline);
  EXPECT_EQ(e.step(), 1u);
}

TEST(Engine, MultiAreaObservationIsAtomic) {
  auto e = henkel_engine();
  e.ingest(make_obs("a", 0, {"5"}, fixture::kPeople, Tier::RS3, UnambiguousState{"True"}));
  const auto states = e.area_states();
  EXPECT_CODE(e.ingest(make_obs("b", 1, {"4", "5", "6"}, fixture::kPeople, Tier::RS3, UnambiguousState{"False"})),
              ErrorCode::HardEvidenceConflict);
  EXPECT_EQ(e.area_states(), states);
}

TEST(Engine, AllLocationReachesEveryArea) {
  auto e = henkel_engine();
  Observation o = make_obs("clock", 0, {}, "Time of Day", Tier::RS3, UnambiguousState{"6pm-6am"});
  o.location = Location::everywhere();
  const auto snaps = e.ingest(o);
  ASSERT_EQ(snaps.size(), 27u);
  for (const auto& s : snaps) {
    EXPECT_EQ(s.seq, 1u);
    EXPECT_EQ(s.step, 1u);
    EXPECT_EQ(s.trigger, "clock");
  }
}

TEST(Engine, SequenceNumbersArePerAreaAndGapFree) {
  auto e = henkel_engine();
  e.ingest(make_obs("a", 0, {"1"}, fixture::kPeople, Tier::RS2, UnambiguousState{"True"}));
  e.ingest(make_obs("b", 1, {"2"}, fixture::kPeople, Tier::RS2, UnambiguousState{"True"}));
  e.ingest(make_obs("c", 2, {"1", "2"}, fixture::kPeople, Tier::RS1, UnambiguousState{"True"}));
  for (const char* id : {"1", "2"}) {
    const auto tl = e.area_timeline(id);
    ASSERT_EQ(tl.size(), 3u);
    for (std::size_t i = 0; i < tl.size(); ++i) EXPECT_EQ(tl[i].seq, i);
  }
  EXPECT_EQ(e.area_timeline("1")[1].step, 1u);
  EXPECT_EQ(e.area_timeline("2")[1].step, 2u);
  EXPECT_EQ(e.step(), 3u);
  const auto at1 = e.snapshots_at(1);
  ASSERT_EQ(at1.size(), 27u);
  EXPECT_EQ(at1[0].seq, 1u);
  EXPECT_EQ(at1[1].seq, 0u);
}

TEST(Engine, LateTimestampIsProcessedInArrivalOrder) {
  auto e = henkel_engine();
  e.ingest(make_obs("late", 10, {"1"}, fixture::kPeople, Tier::RS2, UnambiguousState{"True"}));
  e.ingest(make_obs("early", 5, {"1"}, fixture::kPeople, Tier::RS2, UnambiguousState{"False"}));
  const auto tl = e.area_timeline("1");
  EXPECT_EQ(tl[1].trigger, "late");
  EXPECT_EQ(tl[2].trigger, "early");
  EXPECT_EQ(*e.last_time(), at_minute(5));
}

TEST(Engine, SoftEvidenceHitsItsTargetAndLaterSoftReplacesEarlier) {
  auto e = henkel_engine();
  const auto& net = e.network();
  const auto around = net.index_of(fixture::kAround);
  e.ingest(make_obs("s1", 0, {"8"}, fixture::kAround, Tier::RS3, ProbRatio{{0.3, 0.7}}));
  EXPECT_NEAR(e.current_beliefs("8")[around].probs[0], 0.3, 1e-12);
  e.ingest(make_obs("s2", 1, {"8"}, fixture::kAround, Tier::RS3, ProbRatio{{0.8, 0.2}}));
  EXPECT_NEAR(e.current_beliefs("8")[around].probs[0], 0.8, 1e-12);
  EXPECT_EQ(e.area_state("8").soft_overrides.at(fixture::kAround).observation_id, "s2");
}

TEST(Engine, HaltsWhenEveryKeyNodeIsConfirmed) {
  auto e = leak_engine({"a", "b"});
  e.ingest(make_obs("1", 0, {"a"}, "Leak", Tier::RS3, UnambiguousState{"T"}));
  EXPECT_FALSE(e.halted());
  e.ingest(make_obs("2", 1, {"b"}, "Leak", Tier::RS2, UnambiguousState{"F"}));
  EXPECT_FALSE(e.halted());
  e.ingest(make_obs("3", 2, {"b"}, "Leak", Tier::RS3, UnambiguousState{"F"}));
  EXPECT_TRUE(e.halted());
  EXPECT_CODE(e.ingest(make_obs("4", 3, {"a"}, "Alarm", Tier::RS3, UnambiguousState{"T"})), ErrorCode::EngineHalted);
  EXPECT_EQ(e.step(), 3u);
  const auto& last = e.timeline().back();
  EXPECT_EQ(last.confirmed, std::vector<std::string>{"Leak"});
}

TEST(Engine, NeverHaltsWithoutKeyNodesOrAreas) {
  auto spec = leak_spec();
  spec.key_nodes.clear();
  auto e = leak_engine({"a"}, spec);
  e.ingest(make_obs("1", 0, {"a"}, "Leak", Tier::RS3, UnambiguousState{"T"}));
  e.ingest(make_obs("2", 0, {"a"}, "Alarm", Tier::RS3, UnambiguousState{"T"}));
  EXPECT_FALSE(e.halted());
  auto empty = leak_engine({});
  EXPECT_FALSE(empty.halted());
  EXPECT_TRUE(empty.timeline().empty());
}

TEST(Engine, EvidenceInOneAreaLeavesOthersAlone) {
  auto e = henkel_engine();
  const auto before_tl = e.area_timeline("2");
  const auto before_state = e.area_state("2");
  const auto before_beliefs = e.current_beliefs("2");
  e.ingest(make_obs("a", 0, {"1"}, fixture::kPeople, Tier::RS3, UnambiguousState{"True"}));
  e.ingest(make_obs("b", 1, {"1"}, fixture::kInside, Tier::RS3, LikelihoodRatio{{0.9, 0.1}}));
  EXPECT_EQ(e.area_timeline("2"), before_tl);
  EXPECT_EQ(e.area_state("2"), before_state);
  EXPECT_EQ(e.current_beliefs("2"), before_beliefs);
}

TEST(Replay, SortsByTimeThenIdAndIsDeterministic) {
  auto script = fixture::henkel_script("scenario1.ndjson");
  auto e1 = henkel_engine();
  auto r1 = pipeline::replay(e1, script);
  std::mt19937_64 rng(3);
  std::shuffle(script.begin(), script.end(), rng);
  auto e2 = henkel_engine();
  auto r2 = pipeline::replay(e2, script);
  EXPECT_EQ(r1.timeline, r2.timeline);
  EXPECT_TRUE(r1.rejections.empty());
  EXPECT_EQ(io::timeline_csv(e1.network(), r1.timeline), io::timeline_csv(e2.network(), r2.timeline));
}

TEST(Replay, RecordsAndSkipsRejectedObservations) {
  auto e = henkel_engine();
  std::vector<Observation> script{
      make_obs("a", 0, {"3"}, fixture::kPeople, Tier::RS3, UnambiguousState{"True"}),
      make_obs("b", 1, {"3"}, fixture::kPeople, Tier::RS3, UnambiguousState{"False"}),
      make_obs("c", 2, {"77"}, fixture::kPeople, Tier::RS3, UnambiguousState{"False"}),
      make_obs("d", 3, {"4"}, fixture::kInside, Tier::RS1, LikelihoodRatio{{0.9, 0.1}}),
      make_obs("e", 4, {"4"}, fixture::kPeople, Tier::RS1, UnambiguousState{"True"}),
  };
  auto r = pipeline::replay(e, script);
  ASSERT_EQ(r.rejections.size(), 3u);
  EXPECT_EQ(r.rejections[0].code, ErrorCode::HardEvidenceConflict);
  EXPECT_EQ(r.rejections[1].code, ErrorCode::UnknownArea);
  EXPECT_EQ(r.rejections[2].code, ErrorCode::AmbiguousPayloadFromLowTier);
  EXPECT_EQ(e.step(), 2u);
  ASSERT_EQ(r.processed.size(), 5u);
  EXPECT_TRUE(r.processed[4].accepted);
  EXPECT_EQ(r.processed[4].step_after, 2u);
}

TEST(Replay, ScenarioOneOrderingAtFirstStep) {
  auto e = henkel_engine();
  auto script = fixture::henkel_script("scenario1.ndjson");
  std::vector<Observation> t0;
  for (const auto& o : script) {
    if (o.time == at_minute(0)) t0.push_back(o);
  }
  pipeline::replay(e, t0);
  EXPECT_NEAR(affected(e, "2"), 0.039058, 1e-12);
  EXPECT_NEAR(affected(e, "1"), 0.08008, 1e-12);
  EXPECT_NEAR(affected(e, "4"), 0.121102, 1e-12);
}
