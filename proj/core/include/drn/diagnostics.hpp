#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace drn {

// Raised when an evaluation produces non-finite output or a numerical stage
// cannot complete. The message names the failing stage.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using WarningHandler = std::function<void(std::string_view)>;

// Installs a process-wide sink for non-fatal warnings (validity violations,
// truncated distributions). Passing an empty handler restores the default,
// which writes to stderr.
void set_warning_handler(WarningHandler handler);
void warn(std::string_view message);

}  // namespace drn
