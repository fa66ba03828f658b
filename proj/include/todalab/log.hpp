#pragma once

#include <string>

namespace todalab {

/// Writes "warning: <msg>" to stderr unless warnings are silenced.
void log_warning(const std::string& msg);
void set_warnings_enabled(bool on);

}  // namespace todalab
