#include "gridsplit/log.hpp"

#include <cstdlib>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace gridsplit {

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("gridsplit");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  auto level = spdlog::level::warn;
  if (const char* env = std::getenv("GRIDSPLIT_LOG")) {
    level = spdlog::level::from_str(env);
    // from_str maps unknown names to off.
    if (level == spdlog::level::off && std::string(env) != "off") level = spdlog::level::warn;
  }
  spdlog::set_level(level);
}

}  // namespace gridsplit
