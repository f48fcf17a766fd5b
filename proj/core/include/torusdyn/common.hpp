#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace torusdyn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using IMat = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using IVec = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

// Invalid arguments or violated preconditions (dimension mismatches, bad
// configuration values). These indicate caller bugs, not numerical trouble.
class InvalidArgument : public std::invalid_argument {
 public:
  explicit InvalidArgument(const std::string& what) : std::invalid_argument(what) {}
};

// A frame or image collapsed below working rank (e.g. a disk tangent frame
// driven to numerical degeneracy by the cocycle).
class DegeneracyError : public std::runtime_error {
 public:
  explicit DegeneracyError(const std::string& what) : std::runtime_error(what) {}
};

// An iterative method exhausted its budget. Carries the best value reached so
// callers can report a partial result instead of nothing.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double best_value)
      : std::runtime_error(what), best(best_value) {}
  double best;
};

inline constexpr const char* kVersion = "0.1.0";

}  // namespace torusdyn
