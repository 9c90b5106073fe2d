#include "pipeflow/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace pipeflow {

namespace {

LogLevel g_level = [] {
  const char* env = std::getenv("PIPEFLOW_LOG");
  if (!env) return LogLevel::Info;
  if (std::strcmp(env, "quiet") == 0) return LogLevel::Quiet;
  if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
  return LogLevel::Info;
}();

}  // namespace

LogLevel log_level() { return g_level; }
void set_log_level(LogLevel lv) { g_level = lv; }

void log_info(const std::string& msg) {
  if (g_level >= LogLevel::Info) std::fprintf(stderr, "[pipeflow] %s\n", msg.c_str());
}

void log_debug(const std::string& msg) {
  if (g_level >= LogLevel::Debug) std::fprintf(stderr, "[pipeflow:debug] %s\n", msg.c_str());
}

}  // namespace pipeflow
