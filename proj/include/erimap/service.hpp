#pragma once
// HTTP service over a single engine, all routes under /v1.
//
//   POST /v1/observations            one observation object or an array of them
//   GET  /v1/areas?node=&state=      current choropleth (default: first key node)
//   GET  /v1/areas/{id}/beliefs      all-node marginals of one area
//   GET  /v1/areas/{id}/timeline     every snapshot of one area
//   GET  /v1/snapshots?seq=k         every area as of engine step k
//   GET  /v1/events?from=i           server-sent events, one per snapshot
//   GET  /v1/health
//   GET  /v1/metadata                nodes, states, key nodes, tiers, areas
//
// Errors are {"error": {"code": "<ErrorCode>", "message": "..."}}.

#include "erimap/bundle.hpp"
#include "erimap/error.hpp"
#include "erimap/export.hpp"
#include "erimap/observation.hpp"
#include "erimap/pipeline.hpp"

#include <httplib.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace erimap::service {

using nlohmann::json;

/// HTTP status for an engine error.
inline int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::HardEvidenceConflict: return 409;
    case ErrorCode::EngineHalted: return 410;
    default: return 400;
  }
}

inline json error_body(ErrorCode code, const std::string& message) {
  return {{"error", {{"code", std::string(to_string(code))}, {"message", message}}}};
}

class Service {
 public:
  explicit Service(const bundle::ScenarioBundle& b, std::optional<std::filesystem::path> audit_log = std::nullopt)
      : engine_(bundle::make_engine(b)) {
    if (audit_log) {
      audit_.open(*audit_log, std::ios::app);
      require(audit_.good(), ErrorCode::IoError, "cannot open audit log " + audit_log->string());
    }
    routes();
  }

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;
  ~Service() { stop(); }

  /// Binds to host:port; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port) {
    const int bound = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
    require(bound > 0, ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port));
    port_ = bound;
    return bound;
  }

  /// Serves until stop(). Call bind() first.
  void run() {
    spdlog::info("serving on port {}", port_);
    server_.listen_after_bind();
  }

  void stop() {
    stopping_ = true;
    events_cv_.notify_all();
    server_.stop();
  }

  [[nodiscard]] int port() const noexcept { return port_; }
  [[nodiscard]] bool running() const { return server_.is_running(); }
  void wait_until_ready() const { server_.wait_until_ready(); }

  /// Ingests one observation under the engine lock. Throws what ingest throws.
  std::vector<pipeline::BeliefSnapshot> ingest(const Observation& obs) {
    std::vector<pipeline::BeliefSnapshot> snaps;
    {
      std::unique_lock lock(mu_);
      snaps = engine_.ingest(obs);
      if (audit_.is_open()) {
        audit_ << observation_to_json(obs).dump() << '\n';
        audit_.flush();
      }
    }
    events_cv_.notify_all();
    return snaps;
  }

 private:
  static void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void send_error(httplib::Response& res, int status, ErrorCode code, const std::string& message) {
    send_json(res, status, error_body(code, message));
  }

  static std::optional<std::uint64_t> parse_index(const std::string& text) {
    if (text.empty() || text.size() > 19) return std::nullopt;
    std::uint64_t v = 0;
    for (char c : text) {
      if (c < '0' || c > '9') return std::nullopt;
      v = v * 10 + static_cast<std::uint64_t>(c - '0');
    }
    return v;
  }

  json snapshots_json(const std::vector<pipeline::BeliefSnapshot>& snaps) const {
    json out = json::array();
    for (const auto& s : snaps) out.push_back(io::snapshot_to_json(engine_.network(), s));
    return out;
  }

  json ingest_one(const json& item, int& status) {
    std::string id = item.is_object() && item.contains("id") && item["id"].is_string() ? item["id"].get<std::string>() : "";
    try {
      const Observation obs = observation_from_json(item);
      auto snaps = ingest(obs);
      status = 200;
      std::shared_lock lock(mu_);
      return {{"id", obs.id}, {"status", "accepted"}, {"snapshots", snapshots_json(snaps)}};
    } catch (const Error& e) {
      spdlog::warn("observation '{}' rejected: {}", id, e.what());
      status = status_for(e.code());
      json out = error_body(e.code(), e.detail());
      out["id"] = id;
      out["status"] = "rejected";
      return out;
    }
  }

  void post_observations(const httplib::Request& req, httplib::Response& res) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception& e) {
      send_error(res, 400, ErrorCode::ParseError, std::string("request body is not JSON: ") + e.what());
      return;
    }
    if (body.is_array()) {
      json results = json::array();
      for (const auto& item : body) {
        int status = 0;
        results.push_back(ingest_one(item, status));
      }
      send_json(res, 200, {{"results", std::move(results)}});
      return;
    }
    int status = 0;
    json result = ingest_one(body, status);
    send_json(res, status, result);
  }

  void get_areas(const httplib::Request& req, httplib::Response& res) const {
    std::shared_lock lock(mu_);
    const auto& net = engine_.network();
    auto [node, state] = io::default_target(net);
    if (req.has_param("node")) {
      node = req.get_param_value("node");
      const bn::NodeIndex n = net.index_of(node);
      const auto& ns = net.node(n);
      auto crit = std::find(ns.critical.begin(), ns.critical.end(), true);
      state = ns.states[crit == ns.critical.end() ? 0 : static_cast<std::size_t>(crit - ns.critical.begin())];
    }
    if (req.has_param("state")) state = req.get_param_value("state");
    const bn::NodeIndex n = net.index_of(node);
    const auto& keys = net.key_nodes();
    json doc;
    if (std::find(keys.begin(), keys.end(), n) != keys.end()) {
      doc = io::map_at_step(engine_, engine_.step(), node, state);
    } else {
      doc = spatial::beliefs_to_geojson(engine_.area_states(), net, engine_.areas(), node, state);
      doc["step"] = engine_.step();
      auto t = engine_.last_time();
      doc["time"] = t ? json(format_timestamp(*t)) : json(nullptr);
    }
    send_json(res, 200, doc);
  }

  void get_beliefs(const std::string& area_id, httplib::Response& res) const {
    std::shared_lock lock(mu_);
    const auto& net = engine_.network();
    const auto& st = engine_.area_state(area_id);
    json beliefs = json::array();
    for (const auto& d : engine_.current_beliefs(area_id)) beliefs.push_back(io::distribution_to_json(net, d));
    json hard = json::object();
    for (const auto& [node, state] : st.hard) hard[node] = state;
    send_json(res, 200,
              {{"area_id", area_id},
               {"step", engine_.step()},
               {"beliefs", std::move(beliefs)},
               {"hard_evidence", std::move(hard)},
               {"confirmed", std::vector<std::string>(st.confirmed.begin(), st.confirmed.end())}});
  }

  void get_timeline(const std::string& area_id, httplib::Response& res) const {
    std::shared_lock lock(mu_);
    send_json(res, 200, {{"area_id", area_id}, {"snapshots", snapshots_json(engine_.area_timeline(area_id))}});
  }

  void get_snapshots(const httplib::Request& req, httplib::Response& res) const {
    std::shared_lock lock(mu_);
    std::uint64_t step = engine_.step();
    if (req.has_param("seq")) {
      auto k = parse_index(req.get_param_value("seq"));
      if (!k) {
        send_error(res, 400, ErrorCode::InvalidRequest, "'seq' must be a non-negative integer");
        return;
      }
      if (*k > engine_.step()) {
        send_error(res, 400, ErrorCode::InvalidRequest,
                   "'seq' " + std::to_string(*k) + " is beyond the latest step " + std::to_string(engine_.step()));
        return;
      }
      step = *k;
    }
    send_json(res, 200,
              {{"seq", step}, {"latest", engine_.step()}, {"snapshots", snapshots_json(engine_.snapshots_at(step))}});
  }

  void get_health(httplib::Response& res) const {
    std::shared_lock lock(mu_);
    send_json(res, 200,
              {{"status", "ok"},
               {"halted", engine_.halted()},
               {"step", engine_.step()},
               {"areas", engine_.areas().size()},
               {"snapshots", engine_.timeline().size()}});
  }

  void get_metadata(httplib::Response& res) const {
    std::shared_lock lock(mu_);
    const auto& net = engine_.network();
    json nodes = json::array();
    for (bn::NodeIndex i = 0; i < net.size(); ++i) {
      const auto& n = net.node(i);
      std::vector<std::string> critical;
      for (std::size_t s = 0; s < n.states.size(); ++s) {
        if (n.critical[s]) critical.push_back(n.states[s]);
      }
      std::vector<std::string> parents;
      for (auto p : n.parents) parents.push_back(net.node(p).id);
      nodes.push_back({{"id", n.id}, {"states", n.states}, {"parents", parents}, {"critical_states", critical}});
    }
    std::vector<std::string> keys;
    for (auto k : net.key_nodes()) keys.push_back(net.node(k).id);
    json tiers = json::object();
    for (const auto& [tier, rs] : engine_.config().reliability) tiers[std::string(to_string(tier))] = rs.likelihood;
    std::vector<std::string> areas;
    for (const auto& a : engine_.areas()) areas.push_back(a.id);
    const auto [node, state] = io::default_target(net);
    send_json(res, 200,
              {{"nodes", std::move(nodes)},
               {"key_nodes", keys},
               {"tiers", std::move(tiers)},
               {"theta", engine_.config().regret.theta},
               {"areas", areas},
               {"default_target", {{"node", node}, {"state", state}}}});
  }

  void get_events(const httplib::Request& req, httplib::Response& res) {
    std::size_t from = 0;
    {
      std::shared_lock lock(mu_);
      from = engine_.timeline().size();
    }
    if (req.has_param("from")) {
      auto k = parse_index(req.get_param_value("from"));
      if (!k) {
        send_error(res, 400, ErrorCode::InvalidRequest, "'from' must be a non-negative integer");
        return;
      }
      from = static_cast<std::size_t>(*k);
    }
    res.set_header("Cache-Control", "no-cache");
    auto cursor = std::make_shared<std::size_t>(from);
    auto last_write = std::make_shared<std::chrono::steady_clock::time_point>(std::chrono::steady_clock::now());
    res.set_chunked_content_provider("text/event-stream", [this, cursor, last_write](std::size_t, httplib::DataSink& sink) {
      std::vector<std::string> batch;
      {
        std::shared_lock lock(mu_);
        events_cv_.wait_for(lock, std::chrono::milliseconds(200),
                            [&] { return stopping_.load() || engine_.timeline().size() > *cursor; });
        if (stopping_) {
          sink.done();
          return true;
        }
        const auto& timeline = engine_.timeline();
        for (; *cursor < timeline.size(); ++*cursor) {
          batch.push_back("id: " + std::to_string(*cursor) + "\nevent: snapshot\ndata: " +
                          io::snapshot_to_json(engine_.network(), timeline[*cursor]).dump() + "\n\n");
        }
      }
      const auto now = std::chrono::steady_clock::now();
      if (batch.empty() && now - *last_write > std::chrono::seconds(10)) batch.emplace_back(": keepalive\n\n");
      for (const auto& e : batch) {
        if (!sink.write(e.data(), e.size())) return false;
        *last_write = now;
      }
      return true;
    });
  }

  template <class F>
  static httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const Error& e) {
        const int status = e.code() == ErrorCode::UnknownArea ? 404 : 400;
        send_error(res, status, e.code(), e.detail());
      }
    };
  }

  void routes() {
    server_.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    server_.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });
    server_.Post("/v1/observations", guarded([this](const auto& req, auto& res) { post_observations(req, res); }));
    server_.Get("/v1/areas", guarded([this](const auto& req, auto& res) { get_areas(req, res); }));
    server_.Get(R"(/v1/areas/([^/]+)/beliefs)",
                guarded([this](const auto& req, auto& res) { get_beliefs(req.matches[1].str(), res); }));
    server_.Get(R"(/v1/areas/([^/]+)/timeline)",
                guarded([this](const auto& req, auto& res) { get_timeline(req.matches[1].str(), res); }));
    server_.Get("/v1/snapshots", guarded([this](const auto& req, auto& res) { get_snapshots(req, res); }));
    server_.Get("/v1/events", guarded([this](const auto& req, auto& res) { get_events(req, res); }));
    server_.Get("/v1/health", guarded([this](const auto&, auto& res) { get_health(res); }));
    server_.Get("/v1/metadata", guarded([this](const auto&, auto& res) { get_metadata(res); }));
    server_.set_logger([](const httplib::Request& req, const httplib::Response& res) {
      spdlog::debug("{} {} -> {}", req.method, req.path, res.status);
    });
  }

  pipeline::Engine engine_;
  mutable std::shared_mutex mu_;
  mutable std::condition_variable_any events_cv_;
  std::atomic<bool> stopping_{false};
  std::ofstream audit_;
  httplib::Server server_;
  int port_ = 0;
};

}  // namespace erimap::service
