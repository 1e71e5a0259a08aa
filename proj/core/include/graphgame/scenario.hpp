#pragma once

#include <string>

#include "graphgame/sim.hpp"

namespace graphgame {

/// Built-in value-basis dictionaries, selected by name in configs.
/// Names: quad_error, one_dim_agent1 .. one_dim_agent5.
PolyBasis value_basis_preset(const std::string& name);

/// Drift regression basis (x, x^2, ...) up to the given power, per state
/// component (scalar-state form).
DriftBasis polynomial_drift_basis(int max_power);

/// Scalar control-affine family used by the built-in scenarios:
/// f(x) = theta_1 x + theta_2 x^2, g(x) = cos(2 x) + 2.
AgentModel one_dim_agent(double theta1, double theta2);

/// Five-agent one-dimensional formation scenario: two pinned agents, an
/// exponentially decaying leader, and per-agent polynomial value bases.
SimConfig example_1d_config();

/// Single pinned agent with linear drift, unit effectiveness, quadratic
/// value basis, and a static leader. Known closed-form solution; used by
/// the oracle checks.
SimConfig lqr_scalar_config();

/// Look up a scenario by name ("example_1d" or "lqr_scalar").
SimConfig scenario_by_name(const std::string& name);

}  // namespace graphgame
