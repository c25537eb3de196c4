#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace latdiff {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class TailTruncationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class BoundaryLeakError : public Error {
 public:
  using Error::Error;
};

class StepSizeError : public Error {
 public:
  using Error::Error;
};

class NoRootError : public Error {
 public:
  using Error::Error;
};

class NoSignChangeError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

class TailBoundError : public Error {
 public:
  using Error::Error;
};

class IOError : public Error {
 public:
  using Error::Error;
};

// Non-fatal diagnostics (parameter wrapping, borderline truncation). The
// default sink writes to stderr; tests swap it to capture messages.
using WarningSink = std::function<void(const std::string&)>;

WarningSink set_warning_sink(WarningSink sink);
void warn(const std::string& message);

}  // namespace latdiff
