#pragma once

#include <stdexcept>
#include <string>

namespace vvt {

/// Input rejected before any computation ran: bad parameters, infeasible
/// operating point, malformed file.
class ValidationError : public std::invalid_argument {
  public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A run started but could not produce a trustworthy result (diverging
/// part, steady state never reached).
class RuntimeFailure : public std::runtime_error {
  public:
    explicit RuntimeFailure(const std::string& what) : std::runtime_error(what) {}
};

class NonConvergenceError : public RuntimeFailure {
  public:
    using RuntimeFailure::RuntimeFailure;
};

}  // namespace vvt
