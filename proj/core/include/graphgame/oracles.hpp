#pragma once

#include <string>
#include <vector>

#include "graphgame/sim.hpp"

namespace graphgame {

struct OracleResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Single-agent linear-quadratic check: the converged critic weight must
/// reproduce the closed-form Riccati solution within 5% and leave the
/// Bellman error below 1e-4 across the extrapolation grid.
OracleResult run_lqr_oracle();

/// Drift-weight convergence from a rank-rich synthetic stack with exact
/// derivatives: integrating the weight-update flow must reach a Frobenius
/// error below 1e-3.
OracleResult run_identifier_oracle();

/// The smoothing differentiator must reproduce derivatives of degree-5
/// polynomials to 1e-8 relative error.
OracleResult run_sg_oracle();

std::vector<OracleResult> run_all_oracles();

/// Closed-form positive root of the scalar algebraic Riccati equation
/// for drift slope a, input gain 1, costs q and r.
double scalar_riccati_gain(double a, double q, double r);

}  // namespace graphgame
