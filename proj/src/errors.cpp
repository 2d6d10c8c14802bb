#include "c3/errors.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace c3 {
namespace {

std::mutex g_sink_mutex;

WarningSink& sink() {
  static WarningSink s = [](std::string_view msg) { std::clog << "warning: " << msg << '\n'; };
  return s;
}

}  // namespace

void warn(std::string_view message) {
  std::lock_guard lock(g_sink_mutex);
  if (sink()) sink()(message);
}

WarningSink set_warning_sink(WarningSink next) {
  std::lock_guard lock(g_sink_mutex);
  return std::exchange(sink(), std::move(next));
}

}  // namespace c3
