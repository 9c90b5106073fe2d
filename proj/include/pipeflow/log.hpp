#pragma once

#include <string>

namespace pipeflow {

// Log level comes from the PIPEFLOW_LOG environment variable:
// quiet | info (default) | debug.
enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

LogLevel log_level();
void set_log_level(LogLevel lv);

void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace pipeflow
