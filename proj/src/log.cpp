#include "todalab/log.hpp"

#include <atomic>
#include <iostream>

namespace todalab {

namespace {
std::atomic<bool> enabled{true};
}

void log_warning(const std::string& msg) {
  if (enabled) std::cerr << "warning: " << msg << '\n';
}

void set_warnings_enabled(bool on) { enabled = on; }

}  // namespace todalab
