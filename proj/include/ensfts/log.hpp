#pragma once

#include <functional>
#include <string_view>

namespace ensfts {

enum class LogLevel { Info, Warning };

using LogSink = std::function<void(LogLevel, std::string_view)>;

// Replaces the process-wide sink. The default writes warnings to stderr and
// drops info messages. Passing an empty function restores the default.
void set_log_sink(LogSink sink);

void log_info(std::string_view message);
void log_warning(std::string_view message);

}  // namespace ensfts
