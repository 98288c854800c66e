#pragma once

#include <stdexcept>
#include <string>

namespace mgk {

// Raised when a certified tolerance cannot be met within the configured
// work budget.  achieved is the best certified bound at the point of failure.
class ToleranceError : public std::runtime_error {
public:
  ToleranceError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_bound(achieved) {}
  double achieved_bound;
};

}  // namespace mgk
