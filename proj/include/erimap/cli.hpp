#pragma once
// Command-line front end.
//
//   erimap validate --bundle DIR [--script FILE]
//   erimap replay   --bundle DIR [--script FILE] --out DIR [--node N --state S]
//   erimap serve    --bundle DIR [--host H] [--port P] [--audit-log FILE]
//   erimap exposure --bundle DIR --node N --time T [--substance S] [--minutes M]
//
// Exit codes: 0 success, 1 runtime error, 2 usage error.

#include "erimap/bundle.hpp"
#include "erimap/error.hpp"
#include "erimap/log.hpp"
#include "erimap/replay_report.hpp"
#include "erimap/service.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <csignal>
#include <iostream>
#include <optional>
#include <string>

namespace erimap::cli {

namespace detail {

inline service::Service* g_running = nullptr;

inline void on_signal(int) {
  if (g_running != nullptr) g_running->stop();
}

inline std::vector<Observation> script_for(const bundle::ScenarioBundle& b, const std::string& script) {
  if (!script.empty()) return bundle::load_script(b, script);
  if (b.script_path) return bundle::load_script(b, *b.script_path);
  return {};
}

}  // namespace detail

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  log::configure_from_env();
  CLI::App app{"Evidence-driven hazard maps from Bayesian networks"};
  app.require_subcommand(1);

  std::string bundle_path;
  std::string script;

  auto* validate = app.add_subcommand("validate", "Load and cross-validate a scenario bundle");
  validate->add_option("--bundle", bundle_path, "Bundle directory or bundle.json")->required();
  validate->add_option("--script", script, "Observation script (NDJSON) to check as well");

  std::string out_dir;
  std::string node;
  std::string state;
  auto* replay = app.add_subcommand("replay", "Replay an observation script and write map panels");
  replay->add_option("--bundle", bundle_path, "Bundle directory or bundle.json")->required();
  replay->add_option("--script", script, "Observation script (NDJSON); defaults to the bundle's");
  replay->add_option("--out", out_dir, "Output directory")->required();
  replay->add_option("--node", node, "Mapped node (default: first key node)");
  replay->add_option("--state", state, "Mapped state (default: its first critical state)");

  std::string host = "127.0.0.1";
  int port = 8080;
  std::string audit_log;
  auto* serve = app.add_subcommand("serve", "Serve the live engine over HTTP");
  serve->add_option("--bundle", bundle_path, "Bundle directory or bundle.json")->required();
  serve->add_option("--host", host, "Listen address");
  serve->add_option("--port", port, "Listen port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve->add_option("--audit-log", audit_log, "Append accepted observations to this NDJSON file");

  std::string substance = "chlorine";
  double minutes = 15.0;
  std::string time;
  auto* exposure = app.add_subcommand("exposure", "Print probit soft evidence for areas inside threat zones");
  exposure->add_option("--bundle", bundle_path, "Bundle directory or bundle.json")->required();
  exposure->add_option("--node", node, "Node receiving the evidence")->required();
  exposure->add_option("--time", time, "Observation time (ISO-8601)")->required();
  exposure->add_option("--substance", substance, "Substance name from the bundle");
  exposure->add_option("--minutes", minutes, "Exposure duration in minutes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    const auto b = bundle::load_bundle(bundle_path);
    if (*validate) {
      const auto obs = detail::script_for(b, script);
      out << "bundle ok: " << b.network->size() << " nodes, " << b.areas.size() << " areas, " << b.zones.size()
          << " threat zones, " << obs.size() << " scripted observations\n";
      return 0;
    }
    if (*replay) {
      auto engine = bundle::make_engine(b);
      std::optional<std::pair<std::string, std::string>> target;
      if (!node.empty()) {
        const auto& net = *b.network;
        if (state.empty()) {
          const auto& n = net.node(net.index_of(node));
          auto crit = std::find(n.critical.begin(), n.critical.end(), true);
          state = n.states[crit == n.critical.end() ? 0 : static_cast<std::size_t>(crit - n.critical.begin())];
        }
        target = {node, state};
      }
      auto report = io::run_replay(engine, detail::script_for(b, script), target);
      io::write_report(report, out_dir);
      out << "replayed " << report.result.processed.size() << " observations (" << report.result.rejections.size()
          << " rejected), " << report.panels.size() << " panels written to " << out_dir << "\n";
      return 0;
    }
    if (*serve) {
      service::Service svc(b, audit_log.empty() ? std::nullopt : std::optional<std::filesystem::path>(audit_log));
      const int bound = svc.bind(host, port);
      out << "listening on http://" << host << ":" << bound << "/v1\n" << std::flush;
      detail::g_running = &svc;
      std::signal(SIGINT, detail::on_signal);
      std::signal(SIGTERM, detail::on_signal);
      svc.run();
      detail::g_running = nullptr;
      return 0;
    }
    if (*exposure) {
      auto sub = b.substances.find(substance);
      require(sub != b.substances.end(), ErrorCode::CrossValidationError, "unknown substance '" + substance + "'");
      auto t = parse_timestamp(time);
      require(t.has_value(), ErrorCode::InvalidObservation, "cannot parse time '" + time + "'");
      for (const auto& obs : bundle::exposure_observations(b, node, sub->second, minutes, *t)) {
        out << observation_to_json(obs).dump() << "\n";
      }
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace erimap::cli
