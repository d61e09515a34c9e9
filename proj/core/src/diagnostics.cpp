#include "drn/diagnostics.hpp"

#include <iostream>
#include <mutex>

namespace drn {
namespace {

std::mutex& handler_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& handler_slot() {
  static WarningHandler h;
  return h;
}

}  // namespace

void set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(handler_mutex());
  handler_slot() = std::move(handler);
}

void warn(std::string_view message) {
  std::lock_guard lock(handler_mutex());
  if (handler_slot()) {
    handler_slot()(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

}  // namespace drn
