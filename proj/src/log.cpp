#include "ensfts/log.hpp"

#include <iostream>
#include <mutex>

namespace ensfts {
namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

LogSink& sink() {
  static LogSink s;
  return s;
}

void emit(LogLevel level, std::string_view message) {
  std::lock_guard lock(sink_mutex());
  if (sink()) {
    sink()(level, message);
    return;
  }
  if (level == LogLevel::Warning) std::cerr << "warning: " << message << '\n';
}

}  // namespace

void set_log_sink(LogSink s) {
  std::lock_guard lock(sink_mutex());
  sink() = std::move(s);
}

void log_info(std::string_view message) { emit(LogLevel::Info, message); }
void log_warning(std::string_view message) { emit(LogLevel::Warning, message); }

}  // namespace ensfts
