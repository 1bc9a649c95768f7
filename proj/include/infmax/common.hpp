#pragma once

#include <stdexcept>
#include <string>

namespace infmax {

// Error categories; the CLI maps them onto exit codes (see tools/).
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CapExceededError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace infmax
