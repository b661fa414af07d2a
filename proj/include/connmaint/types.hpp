#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace connmaint {

// Positions and control inputs live in R^m; m is a runtime parameter.
using Vec = Eigen::VectorXd;
using Position = Eigen::VectorXd;
using PositionList = std::vector<Position>;

// Raised when a parameter violates its documented range.
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a numerical routine cannot produce a trustworthy answer.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, int iterations)
      : std::runtime_error(what), iterations_(iterations) {}
  int iterations() const noexcept { return iterations_; }

 private:
  int iterations_;
};

inline bool all_finite(const Vec& v) { return v.allFinite(); }

// Scales v down so that its Euclidean norm is at most max_norm.
inline Vec cap_norm(const Vec& v, double max_norm) {
  const double n = v.norm();
  if (n > max_norm && n > 0.0) return v * (max_norm / n);
  return v;
}

}  // namespace connmaint
