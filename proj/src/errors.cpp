#include "latdiff/errors.hpp"

#include <iostream>
#include <mutex>

namespace latdiff {

namespace {

std::mutex sink_mutex;

WarningSink& sink() {
  static WarningSink s = [](const std::string& msg) { std::cerr << "latdiff: warning: " << msg << '\n'; };
  return s;
}

}  // namespace

WarningSink set_warning_sink(WarningSink next) {
  std::lock_guard lock(sink_mutex);
  WarningSink previous = std::move(sink());
  sink() = std::move(next);
  return previous;
}

void warn(const std::string& message) {
  std::lock_guard lock(sink_mutex);
  if (sink()) sink()(message);
}

}  // namespace latdiff
