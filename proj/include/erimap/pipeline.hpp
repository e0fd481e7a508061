#pragma once
// Operation-phase engine.
//
// Each observation is routed to its area(s), classified, and applied to
// the areas' evidence records; the key nodes of every touched area are
// then recomputed and one BeliefSnapshot per area is appended to the
// timeline. An observation is applied atomically: if any addressed area
// rejects it, no area changes. The engine halts once every key node is
// confirmed by hard evidence in every area.

#include "erimap/bn/inference.hpp"
#include "erimap/bn/network.hpp"
#include "erimap/error.hpp"
#include "erimap/evidence.hpp"
#include "erimap/observation.hpp"
#include "erimap/spatial.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <tuple>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace erimap::pipeline {

struct BeliefSnapshot {
  std::uint64_t seq = 0;   // per area, gap-free, 0 is the prior
  std::uint64_t step = 0;  // engine-wide count of accepted observations at emission
  std::optional<Timestamp> time;
  std::string area_id;
  std::vector<bn::Distribution> marginals;  // key nodes, in key-node order
  std::vector<std::string> confirmed;       // key nodes carrying hard evidence
  std::string trigger;                      // observation id, empty for the prior

  friend bool operator==(const BeliefSnapshot&, const BeliefSnapshot&) = default;
};

class Engine {
 public:
  Engine(std::shared_ptr<const bn::Network> net, std::vector<spatial::Area> areas, evidence::EvidenceConfig config)
      : net_(std::move(net)), areas_(std::move(areas)), config_(std::move(config)) {
    require(net_ != nullptr, ErrorCode::InvalidSpec, "engine needs a network");
    for (const auto& [tier, rs] : config_.reliability) evidence::validate(rs);
    evidence::validate(config_.regret);
    states_ = spatial::instantiate_areas(*net_, areas_);
    priors_ = bn::marginals(*net_, {}, {});
    for (const auto& a : areas_) emit(states_.at(a.id), std::nullopt, "");
    update_halted();
  }

  [[nodiscard]] const bn::Network& network() const noexcept { return *net_; }
  [[nodiscard]] std::shared_ptr<const bn::Network> network_ptr() const noexcept { return net_; }
  [[nodiscard]] const std::vector<spatial::Area>& areas() const noexcept { return areas_; }
  [[nodiscard]] const std::map<std::string, spatial::AreaState>& area_states() const noexcept { return states_; }
  [[nodiscard]] const evidence::EvidenceConfig& config() const noexcept { return config_; }
  [[nodiscard]] const std::vector<BeliefSnapshot>& timeline() const noexcept { return timeline_; }
  [[nodiscard]] bool halted() const noexcept { return halted_; }
  [[nodiscard]] std::uint64_t step() const noexcept { return step_; }
  [[nodiscard]] const std::vector<bn::Distribution>& priors() const noexcept { return priors_; }
  [[nodiscard]] std::optional<Timestamp> last_time() const noexcept { return last_time_; }

  /// Throws UnknownArea.
  [[nodiscard]] const spatial::AreaState& area_state(const std::string& id) const {
    auto it = states_.find(id);
    require(it != states_.end(), ErrorCode::UnknownArea, "unknown area '" + id + "'");
    return it->second;
  }

  /// Marginals of every node under the area's accumulated evidence.
  [[nodiscard]] std::vector<bn::Distribution> current_beliefs(const std::string& area_id) const {
    const auto& st = area_state(area_id);
    return bn::marginals(*net_, st.hard, st.likelihoods());
  }

  /// Applies one observation and returns the snapshots it produced.
  /// Throws EngineHalted, UnknownArea, HardEvidenceConflict,
  /// ZeroProbabilityEvidence and every classification error; on throw the
  /// engine is unchanged.
  std::vector<BeliefSnapshot> ingest(const Observation& obs) {
    require(!halted_, ErrorCode::EngineHalted, "all key variables are confirmed; engine has stopped");
    const std::vector<std::string> targets = resolve_location(obs.location);
    const evidence::Evidence ev = evidence::classify(obs, config_, *net_);

    std::vector<spatial::AreaState> updated;
    updated.reserve(targets.size());
    std::vector<std::vector<bn::Distribution>> key_marginals;
    for (const auto& id : targets) {
      spatial::AreaState next = states_.at(id);
      apply(next, ev);
      key_marginals.push_back(compute_key_marginals(next));
      updated.push_back(std::move(next));
    }

    if (last_time_ && obs.time < *last_time_) {
      spdlog::warn("observation '{}' at {} precedes the previous one at {}; processed in arrival order", obs.id,
                   format_timestamp(obs.time), format_timestamp(*last_time_));
    }
    ++step_;
    last_time_ = obs.time;
    std::vector<BeliefSnapshot> out;
    out.reserve(updated.size());
    for (std::size_t i = 0; i < updated.size(); ++i) {
      auto& slot = states_.at(updated[i].area_id);
      slot = std::move(updated[i]);
      out.push_back(emit(slot, obs.time, obs.id, std::move(key_marginals[i])));
    }
    update_halted();
    if (halted_) spdlog::info("all key variables confirmed in every area; engine halted after '{}'", obs.id);
    return out;
  }

  /// Snapshot of every area as of engine step `step` (latest per area with
  /// snapshot.step <= step), in area order.
  [[nodiscard]] std::vector<BeliefSnapshot> snapshots_at(std::uint64_t step) const {
    std::map<std::string, const BeliefSnapshot*> latest;
    for (const auto& s : timeline_) {
      if (s.step > step) break;
      latest[s.area_id] = &s;
    }
    std::vector<BeliefSnapshot> out;
    for (const auto& a : areas_) {
      if (auto it = latest.find(a.id); it != latest.end()) out.push_back(*it->second);
    }
    return out;
  }

  [[nodiscard]] std::vector<BeliefSnapshot> area_timeline(const std::string& area_id) const {
    (void)area_state(area_id);
    std::vector<BeliefSnapshot> out;
    for (const auto& s : timeline_) {
      if (s.area_id == area_id) out.push_back(s);
    }
    return out;
  }

  [[nodiscard]] std::vector<bn::NodeIndex> key_nodes() const { return net_->key_nodes(); }

 private:
  std::vector<std::string> resolve_location(const Location& loc) const {
    if (loc.all) {
      std::vector<std::string> ids;
      for (const auto& a : areas_) ids.push_back(a.id);
      return ids;
    }
    require(!loc.areas.empty(), ErrorCode::InvalidObservation, "observation addresses no area");
    std::vector<std::string> ids;
    for (const auto& id : loc.areas) {
      require(states_.count(id) == 1, ErrorCode::UnknownArea, "unknown area '" + id + "'");
      if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
    }
    return ids;
  }

  void apply(spatial::AreaState& st, const evidence::Evidence& ev) const {
    std::visit(
        [&](const auto& kind) {
          using K = std::decay_t<decltype(kind)>;
          if constexpr (std::is_same_v<K, evidence::Hard>) {
            auto it = st.hard.find(ev.node_id);
            if (it != st.hard.end() && it->second != kind.state) {
              spdlog::error("area '{}': hard evidence {}={} from '{}' contradicts recorded {}; rejected", st.area_id,
                            ev.node_id, kind.state, ev.origin, it->second);
              fail(ErrorCode::HardEvidenceConflict, "area '" + st.area_id + "': '" + ev.node_id + "' is already '" +
                                                        it->second + "', observation says '" + kind.state + "'");
            }
            st.hard[ev.node_id] = kind.state;
            st.confirmed.insert(ev.node_id);
          } else if constexpr (std::is_same_v<K, evidence::Virtual>) {
            st.virtuals.push_back({ev.node_id, kind.likelihood, ev.origin});
          } else {
            const auto& prior = priors_[net_->index_of(ev.node_id)];
            auto lk = evidence::soft_to_virtual(kind.ratio, prior);
            if (auto it = st.soft_overrides.find(ev.node_id); it != st.soft_overrides.end()) {
              spdlog::info("area '{}': soft evidence on '{}' from '{}' replaces '{}'", st.area_id, ev.node_id,
                           ev.origin, it->second.observation_id);
            }
            st.soft_overrides[ev.node_id] = spatial::SoftOverride{kind.ratio, std::move(lk), ev.origin};
          }
        },
        ev.kind);
  }

  std::vector<bn::Distribution> compute_key_marginals(const spatial::AreaState& st) const {
    const auto liks = st.likelihoods();
    std::vector<bn::Distribution> out;
    for (bn::NodeIndex k : net_->key_nodes()) out.push_back(bn::query(*net_, net_->node(k).id, st.hard, liks));
    return out;
  }

  const BeliefSnapshot& emit(const spatial::AreaState& st, std::optional<Timestamp> time, const std::string& trigger,
                             std::optional<std::vector<bn::Distribution>> marginals = std::nullopt) {
    BeliefSnapshot s;
    s.seq = next_seq_[st.area_id]++;
    s.step = step_;
    s.time = time;
    s.area_id = st.area_id;
    s.marginals = marginals ? std::move(*marginals) : compute_key_marginals(st);
    for (bn::NodeIndex k : net_->key_nodes()) {
      if (st.is_confirmed(net_->node(k).id)) s.confirmed.push_back(net_->node(k).id);
    }
    s.trigger = trigger;
    timeline_.push_back(std::move(s));
    return timeline_.back();
  }

  void update_halted() {
    const auto& keys = net_->key_nodes();
    if (areas_.empty() || keys.empty()) {
      halted_ = false;
      return;
    }
    halted_ = std::all_of(states_.begin(), states_.end(), [&](const auto& kv) {
      return std::all_of(keys.begin(), keys.end(), [&](bn::NodeIndex k) { return kv.second.is_confirmed(net_->node(k).id); });
    });
  }

  std::shared_ptr<const bn::Network> net_;
  std::vector<spatial::Area> areas_;
  evidence::EvidenceConfig config_;
  std::map<std::string, spatial::AreaState> states_;
  std::vector<bn::Distribution> priors_;
  std::vector<BeliefSnapshot> timeline_;
  std::map<std::string, std::uint64_t> next_seq_;
  std::uint64_t step_ = 0;
  std::optional<Timestamp> last_time_;
  bool halted_ = false;
};

struct Rejection {
  std::string observation_id;
  ErrorCode code;
  std::string message;
};

struct ProcessedObservation {
  std::string observation_id;
  Timestamp time;
  std::uint64_t step_after = 0;
  bool accepted = false;
};

struct ReplayResult {
  std::vector<BeliefSnapshot> timeline;  // full engine timeline, prior snapshots first
  std::vector<ProcessedObservation> processed;
  std::vector<Rejection> rejections;
};

/// Stable sort by (time, id); the order replay processes a script in.
inline std::vector<Observation> replay_order(std::vector<Observation> observations) {
  std::stable_sort(observations.begin(), observations.end(), [](const Observation& a, const Observation& b) {
    return std::tie(a.time, a.id) < std::tie(b.time, b.id);
  });
  return observations;
}

using ReplayObserver = std::function<void(const Engine&, const Observation&, const std::vector<BeliefSnapshot>&)>;

/// Folds `ingest` over the observations in (time, id) order. A rejected
/// observation is recorded and skipped.
inline ReplayResult replay(Engine& engine, std::vector<Observation> observations, const ReplayObserver& observer = {}) {
  ReplayResult result;
  for (const auto& obs : replay_order(std::move(observations))) {
    ProcessedObservation p{obs.id, obs.time, engine.step(), false};
    try {
      auto snaps = engine.ingest(obs);
      p.accepted = true;
      p.step_after = engine.step();
      if (observer) observer(engine, obs, snaps);
    } catch (const Error& e) {
      spdlog::warn("observation '{}' rejected: {}", obs.id, e.what());
      result.rejections.push_back({obs.id, e.code(), e.detail()});
    }
    result.processed.push_back(std::move(p));
  }
  result.timeline = engine.timeline();
  return result;
}

}  // namespace erimap::pipeline
