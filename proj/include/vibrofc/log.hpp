#pragma once

#include <atomic>
#include <cstdlib>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace vibrofc {

/// Diagnostics logger (stderr). Level comes from VIBROFC_LOG in {error, warn, info, debug};
/// default warn.
inline spdlog::logger& logger() {
  static auto instance = [] {
    auto l = spdlog::stderr_color_mt("vibrofc");
    l->set_pattern("[%l] %v");
    spdlog::level::level_enum level = spdlog::level::warn;
    if (const char* env = std::getenv("VIBROFC_LOG")) {
      const std::string v(env);
      if (v == "error") level = spdlog::level::err;
      else if (v == "warn") level = spdlog::level::warn;
      else if (v == "info") level = spdlog::level::info;
      else if (v == "debug") level = spdlog::level::debug;
    }
    l->set_level(level);
    return l;
  }();
  return *instance;
}

}  // namespace vibrofc
