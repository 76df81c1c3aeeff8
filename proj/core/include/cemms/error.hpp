#pragma once

#include <stdexcept>
#include <string>

namespace cemms {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A linear or eigen solve that failed; carries the residual seen at failure.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}

  double residual() const { return residual_; }

 private:
  double residual_;
};

}  // namespace cemms
