#pragma once

#include <spdlog/spdlog.h>

namespace rampsched {

// Reads RAMP_SCHED_LOG (error|warn|info|debug) and applies it to the default
// spdlog logger, which writes to stderr. Unknown values fall back to warn.
void configure_logging_from_env();

}  // namespace rampsched
