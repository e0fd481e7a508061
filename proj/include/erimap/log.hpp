#pragma once

#include <spdlog/spdlog.h>

#include <cstdlib>
#include <string>

namespace erimap::log {

/// Applies the level named by the ERIMAP_LOG environment variable
/// (trace, debug, info, warn, error, off). Unset leaves spdlog's default.
inline void configure_from_env() {
  if (const char* level = std::getenv("ERIMAP_LOG"); level != nullptr && *level != '\0') {
    spdlog::set_level(spdlog::level::from_str(level));
  }
}

}  // namespace erimap::log
