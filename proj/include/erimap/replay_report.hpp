#pragma once
// Batch replay of an observation script into files:
//
//   timeline.csv          every snapshot (key-node marginals)
//   panels/panel_NNN.geojson
//                         one choropleth per distinct observation time, taken
//                         after all observations at that time; a single prior
//                         panel when the script is empty
//   timeseries.json       all-node marginals of each area after every change
//   rejections.json       observations that were skipped, with error codes

#include "erimap/bundle.hpp"
#include "erimap/export.hpp"
#include "erimap/pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace erimap::io {

namespace fs = std::filesystem;

struct ReplayReport {
  pipeline::ReplayResult result;
  std::string timeline_csv;
  std::vector<json> panels;
  json timeseries;
  json rejections;
};

namespace detail {

inline json beliefs_entry(const bn::Network& net, std::uint64_t step, std::uint64_t seq,
                          const std::optional<Timestamp>& time, const std::string& trigger,
                          const std::vector<bn::Distribution>& beliefs) {
  json dists = json::array();
  for (const auto& d : beliefs) dists.push_back(distribution_to_json(net, d));
  return {{"step", step},
          {"seq", seq},
          {"time", time ? json(format_timestamp(*time)) : json(nullptr)},
          {"trigger", trigger},
          {"beliefs", std::move(dists)}};
}

}  // namespace detail

/// Runs the script through `engine` and renders every output document.
/// Panels show `target_node = target_state` (defaults to the first key
/// node's critical state).
inline ReplayReport run_replay(pipeline::Engine& engine, std::vector<Observation> script,
                               std::optional<std::pair<std::string, std::string>> target = std::nullopt) {
  const auto& net = engine.network();
  const auto [node_id, state] = target ? *target : default_target(net);

  std::map<std::string, json> series;
  for (const auto& a : engine.areas()) {
    series[a.id] = json::array({detail::beliefs_entry(net, 0, 0, std::nullopt, "", engine.current_beliefs(a.id))});
  }
  auto observer = [&](const pipeline::Engine& eng, const Observation&,
                      const std::vector<pipeline::BeliefSnapshot>& snaps) {
    for (const auto& s : snaps) {
      series[s.area_id].push_back(
          detail::beliefs_entry(net, s.step, s.seq, s.time, s.trigger, eng.current_beliefs(s.area_id)));
    }
  };

  ReplayReport report;
  report.result = pipeline::replay(engine, std::move(script), observer);
  report.timeline_csv = timeline_csv(net, report.result.timeline);

  const auto& processed = report.result.processed;
  if (processed.empty()) {
    report.panels.push_back(map_at_step(engine, 0, node_id, state));
  }
  for (std::size_t i = 0; i < processed.size(); ++i) {
    const bool last_of_group = i + 1 == processed.size() || processed[i + 1].time != processed[i].time;
    if (!last_of_group) continue;
    std::uint64_t step = 0;
    for (std::size_t j = 0; j <= i; ++j) {
      if (processed[j].accepted) step = processed[j].step_after;
    }
    report.panels.push_back(map_at_step(engine, step, node_id, state));
  }

  report.timeseries = json::array();
  for (const auto& a : engine.areas()) {
    report.timeseries.push_back({{"area_id", a.id}, {"series", std::move(series[a.id])}});
  }

  report.rejections = json::array();
  for (const auto& r : report.result.rejections) {
    report.rejections.push_back(
        {{"observation_id", r.observation_id}, {"code", std::string(to_string(r.code))}, {"message", r.message}});
  }
  return report;
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  require(out.good(), ErrorCode::IoError, "failed writing " + path.string());
}

inline std::string panel_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "panel_%03zu.geojson", i);
  return buf;
}

/// Writes the report under `out_dir`, replacing earlier panel files.
inline void write_report(const ReplayReport& report, const fs::path& out_dir) {
  fs::create_directories(out_dir / "panels");
  std::vector<fs::path> stale;
  for (const auto& entry : fs::directory_iterator(out_dir / "panels")) {
    if (entry.path().extension() == ".geojson") stale.push_back(entry.path());
  }
  for (const auto& p : stale) fs::remove(p);
  write_text(out_dir / "timeline.csv", report.timeline_csv);
  for (std::size_t i = 0; i < report.panels.size(); ++i) {
    write_text(out_dir / "panels" / panel_name(i), report.panels[i].dump(2) + "\n");
  }
  write_text(out_dir / "timeseries.json", report.timeseries.dump(2) + "\n");
  write_text(out_dir / "rejections.json", report.rejections.dump(2) + "\n");
}

/// `erimap replay`: fresh engine from the bundle, replay, write outputs.
inline ReplayReport cmd_replay(const bundle::ScenarioBundle& b, std::vector<Observation> script, const fs::path& out_dir) {
  auto engine = bundle::make_engine(b);
  auto report = run_replay(engine, std::move(script));
  write_report(report, out_dir);
  return report;
}

}  // namespace erimap::io
