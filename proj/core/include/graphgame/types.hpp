#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace graphgame {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Node index used for the leader in APIs that accept either an agent
/// index (0-based) or the leader.
inline constexpr int kLeader = -1;

/// Control effectiveness lost column rank at a visited state.
struct RankDeficiencyError : std::runtime_error {
  explicit RankDeficiencyError(const std::string& what)
      : std::runtime_error(what) {}
};

/// The subgraph control-coupling matrix is numerically singular, so the
/// control errors cannot be mapped back to implementable inputs.
struct SingularCouplingError : std::runtime_error {
  explicit SingularCouplingError(const std::string& what)
      : std::runtime_error(what) {}
};

/// A simulation produced a non-finite value or violated a runtime bound.
struct NumericalAbort : std::runtime_error {
  explicit NumericalAbort(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace graphgame
