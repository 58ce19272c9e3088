#include "rampsched/log.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>

#include <cstdlib>
#include <string_view>

namespace rampsched {

void configure_logging_from_env() {
  static const auto logger = [] {
    auto l = spdlog::stderr_color_mt("rampsched");
    l->set_pattern("[%l] %v");
    spdlog::set_default_logger(l);
    return l;
  }();

  auto level = spdlog::level::warn;
  if (const char* env = std::getenv("RAMP_SCHED_LOG")) {
    const std::string_view v{env};
    if (v == "error") level = spdlog::level::err;
    else if (v == "warn") level = spdlog::level::warn;
    else if (v == "info") level = spdlog::level::info;
    else if (v == "debug") level = spdlog::level::debug;
  }
  logger->set_level(level);
}

}  // namespace rampsched
