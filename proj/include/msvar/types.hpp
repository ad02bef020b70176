#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace msvar {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// All failures carry a machine-readable category (stable identifier used in CLI
// exit diagnostics and tests) plus a human-readable message.
class Error : public std::runtime_error {
public:
  Error(std::string category, const std::string& message)
      : std::runtime_error(category + ": " + message),
        category_(std::move(category)) {}

  const std::string& category() const noexcept { return category_; }

private:
  std::string category_;
};

[[noreturn]] inline void fail(const std::string& category,
                              const std::string& message) {
  throw Error(category, message);
}

}  // namespace msvar
