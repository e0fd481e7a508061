#pragma once
// Observation record and its wire form.
//
// One NDJSON line per observation:
//
//   {"id": "s1-t1-600", "time": "2024-05-01T00:05:00Z", "location": ["6", "7"] | "all",
//    "node": "Critical Gas Dose around Building", "tier": "RS3",
//    "probability_ratio": [0.8, 0.2], "source": "Simulation"}
//
// Exactly one of "state", "probability_ratio" or "likelihood_ratio" carries
// the observed state(s).

#include "erimap/error.hpp"
#include "erimap/json_util.hpp"

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace erimap {

using Timestamp = std::chrono::sys_seconds;

/// Parses ISO-8601 `YYYY-MM-DDTHH:MM:SS[.fff][Z|±HH:MM]` to UTC seconds.
/// Fractional seconds are truncated; a missing zone designator means UTC.
inline std::optional<Timestamp> parse_timestamp(std::string_view text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  int consumed = 0;
  std::string buf(text);
  if (std::sscanf(buf.c_str(), "%4d-%2d-%2d%*1[Tt ]%2d:%2d:%2d%n", &y, &mo, &d, &h, &mi, &s, &consumed) != 6) {
    return std::nullopt;
  }
  std::string_view rest = text.substr(static_cast<std::size_t>(consumed));
  if (!rest.empty() && rest.front() == '.') {
    std::size_t k = 1;
    while (k < rest.size() && rest[k] >= '0' && rest[k] <= '9') ++k;
    if (k == 1) return std::nullopt;
    rest.remove_prefix(k);
  }
  int offset_minutes = 0;
  if (rest == "Z" || rest == "z" || rest.empty()) {
    // UTC
  } else if ((rest.front() == '+' || rest.front() == '-') && rest.size() == 6 && rest[3] == ':') {
    int oh = 0, om = 0;
    if (std::sscanf(std::string(rest.substr(1)).c_str(), "%2d:%2d", &oh, &om) != 2 || oh > 23 || om > 59) {
      return std::nullopt;
    }
    offset_minutes = (rest.front() == '+' ? 1 : -1) * (oh * 60 + om);
  } else {
    return std::nullopt;
  }
  if (h > 23 || mi > 59 || s > 60) return std::nullopt;
  using namespace std::chrono;
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s} - minutes{offset_minutes};
}

inline std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto day_point = floor<days>(t);
  const year_month_day ymd{day_point};
  const hh_mm_ss<seconds> tod{t - day_point};
  char out[64];
  std::snprintf(out, sizeof out, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long>(tod.hours().count()), static_cast<long>(tod.minutes().count()),
                static_cast<long>(tod.seconds().count()));
  return out;
}

enum class Tier : std::uint8_t { RS1, RS2, RS3 };

constexpr std::string_view to_string(Tier t) noexcept {
  switch (t) {
    case Tier::RS1: return "RS1";
    case Tier::RS2: return "RS2";
    case Tier::RS3: return "RS3";
  }
  return "?";
}

inline std::optional<Tier> parse_tier(std::string_view s) {
  if (s == "RS1") return Tier::RS1;
  if (s == "RS2") return Tier::RS2;
  if (s == "RS3") return Tier::RS3;
  return std::nullopt;
}

struct UnambiguousState {
  std::string state;
  friend bool operator==(const UnambiguousState&, const UnambiguousState&) = default;
};
struct ProbRatio {
  std::vector<double> values;
  friend bool operator==(const ProbRatio&, const ProbRatio&) = default;
};
struct LikelihoodRatio {
  std::vector<double> values;
  friend bool operator==(const LikelihoodRatio&, const LikelihoodRatio&) = default;
};

using Payload = std::variant<UnambiguousState, ProbRatio, LikelihoodRatio>;

/// Either every area of the site or an explicit list.
struct Location {
  bool all = false;
  std::vector<std::string> areas;

  static Location everywhere() { return {true, {}}; }
  static Location of(std::vector<std::string> ids) { return {false, std::move(ids)}; }
  friend bool operator==(const Location&, const Location&) = default;
};

struct Observation {
  std::string id;
  Timestamp time{};
  Location location;
  std::string node_id;
  Tier tier = Tier::RS1;
  Payload payload;
  std::string source;

  friend bool operator==(const Observation&, const Observation&) = default;
};

/// Throws InvalidObservation naming the offending field.
inline Observation observation_from_json(const nlohmann::json& j) {
  auto invalid = [](const std::string& msg) { fail(ErrorCode::InvalidObservation, msg); };
  if (!j.is_object()) invalid("observation must be a JSON object");
  auto string_field = [&](const char* key) -> std::string {
    auto it = j.find(key);
    if (it == j.end()) invalid(std::string("missing field '") + key + "'");
    if (!it->is_string() || it->get_ref<const std::string&>().empty()) {
      invalid(std::string("field '") + key + "' must be a non-empty string");
    }
    return it->get<std::string>();
  };
  auto vector_field = [&](const nlohmann::json& v, const char* key) {
    if (!v.is_array() || v.empty()) invalid(std::string("field '") + key + "' must be a non-empty array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) invalid(std::string("field '") + key + "' must contain only numbers");
      out.push_back(x.get<double>());
    }
    return out;
  };

  Observation obs;
  obs.id = string_field("id");
  const std::string time_text = string_field("time");
  auto t = parse_timestamp(time_text);
  if (!t) invalid("field 'time' is not an ISO-8601 timestamp: '" + time_text + "'");
  obs.time = *t;

  auto loc = j.find("location");
  if (loc == j.end()) invalid("missing field 'location'");
  if (loc->is_string() && loc->get<std::string>() == "all") {
    obs.location = Location::everywhere();
  } else if (loc->is_array() && !loc->empty()) {
    std::vector<std::string> ids;
    for (const auto& a : *loc) {
      if (a.is_string()) {
        ids.push_back(a.get<std::string>());
      } else if (a.is_number_integer()) {
        ids.push_back(std::to_string(a.get<long long>()));
      } else {
        invalid("field 'location' entries must be area ids");
      }
    }
    obs.location = Location::of(std::move(ids));
  } else {
    invalid("field 'location' must be \"all\" or a non-empty list of area ids");
  }

  obs.node_id = string_field("node");
  const std::string tier_text = string_field("tier");
  auto tier = parse_tier(tier_text);
  if (!tier) fail(ErrorCode::UnknownTier, "unknown reliability tier '" + tier_text + "'");
  obs.tier = *tier;

  int payloads = 0;
  if (j.contains("state")) {
    obs.payload = UnambiguousState{string_field("state")};
    ++payloads;
  }
  if (auto it = j.find("probability_ratio"); it != j.end()) {
    obs.payload = ProbRatio{vector_field(*it, "probability_ratio")};
    ++payloads;
  }
  if (auto it = j.find("likelihood_ratio"); it != j.end()) {
    obs.payload = LikelihoodRatio{vector_field(*it, "likelihood_ratio")};
    ++payloads;
  }
  if (payloads != 1) invalid("exactly one of 'state', 'probability_ratio', 'likelihood_ratio' is required");

  if (auto it = j.find("source"); it != j.end()) {
    if (!it->is_string()) invalid("field 'source' must be a string");
    obs.source = it->get<std::string>();
  }
  return obs;
}

inline nlohmann::json observation_to_json(const Observation& obs) {
  nlohmann::json j;
  j["id"] = obs.id;
  j["time"] = format_timestamp(obs.time);
  j["location"] = obs.location.all ? nlohmann::json("all") : nlohmann::json(obs.location.areas);
  j["node"] = obs.node_id;
  j["tier"] = std::string(to_string(obs.tier));
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, UnambiguousState>) {
          j["state"] = p.state;
        } else if constexpr (std::is_same_v<P, ProbRatio>) {
          j["probability_ratio"] = p.values;
        } else {
          j["likelihood_ratio"] = p.values;
        }
      },
      obs.payload);
  j["source"] = obs.source;
  return j;
}

/// Parses newline-delimited observations. Blank lines and lines starting
/// with '#' are skipped. Errors carry the 1-based line number.
inline std::vector<Observation> parse_ndjson(std::string_view text, const std::string& where = "script") {
  std::vector<Observation> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
    if (line.empty() || line.front() == '#') continue;
    const std::string at = where + ":" + std::to_string(line_no);
    try {
      out.push_back(observation_from_json(json_util::parse(line, at)));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ParseError) throw;
      fail(e.code(), at + ": " + e.detail());
    }
  }
  return out;
}

}  // namespace erimap
