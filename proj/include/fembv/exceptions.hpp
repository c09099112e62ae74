#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fembv {

// Bad input data or configuration. The CLI maps this to exit code 2.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Failure inside the numerical machinery. The CLI maps this to exit code 3.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised by the assignment step when some observation is infeasible under
// every regime, so no switching path can have finite loss.
struct InfeasiblePointError : NumericalError {
  InfeasiblePointError(std::string location_id, std::int64_t t)
      : NumericalError("point infeasible under every regime at location '" +
                       location_id + "', time " + std::to_string(t)),
        location(std::move(location_id)),
        time(t) {}
  std::string location;
  std::int64_t time;
};

}  // namespace fembv
