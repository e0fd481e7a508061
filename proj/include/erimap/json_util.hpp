#pragma once

#include "erimap/error.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

namespace erimap::json_util {

using json = nlohmann::json;

/// Returns j[key], raising ParseError that names `where` and the field.
inline const json& field(const json& j, std::string_view key, const std::string& where) {
  require(j.is_object(), ErrorCode::ParseError, where + ": expected an object");
  auto it = j.find(key);
  require(it != j.end(), ErrorCode::ParseError, where + ": missing field '" + std::string(key) + "'");
  return *it;
}

template <class T>
T get(const json& j, std::string_view key, const std::string& where) {
  const json& v = field(j, key, where);
  try {
    return v.get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, where + ": field '" + std::string(key) + "' has the wrong type (" + e.what() + ")");
  }
}

template <class T>
T as(const json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, where + ": wrong type (" + e.what() + ")");
  }
}

inline json parse(std::string_view text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ParseError, where + ": " + e.what());
  }
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json load(const std::filesystem::path& path) { return parse(read_text(path), path.string()); }

}  // namespace erimap::json_util
