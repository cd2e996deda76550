#pragma once

#include <stdexcept>
#include <string>

namespace allocvar {

/// Invalid argument or model parameter supplied by the caller.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operation invoked on an object that is not in a usable state.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A numerical routine failed in a way that valid inputs should never trigger.
class InternalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace allocvar
