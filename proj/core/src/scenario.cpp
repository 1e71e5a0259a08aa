#include "graphgame/scenario.hpp"

#include <cmath>

namespace graphgame {

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

std::vector<std::vector<PolyTerm>> scaled_monomials(
    std::initializer_list<std::pair<double, std::vector<int>>> terms) {
  std::vector<std::vector<PolyTerm>> out;
  for (const auto& [coef, powers] : terms)
    out.push_back(PolyBasis::monomial(coef, powers));
  return out;
}

}  // namespace

PolyBasis value_basis_preset(const std::string& name) {
  // Coordinates are [own error, extended-neighbor errors..., own state].
  if (name == "quad_error")
    return PolyBasis(2, scaled_monomials({{0.5, {2, 0}}}));
  if (name == "one_dim_agent1" || name == "one_dim_agent2") {
    // dim 3: [e_own, e_peer, x]; the two agents mirror each other.
    return PolyBasis(3, scaled_monomials({{0.5, {2, 0, 0}},
                                          {0.25, {4, 0, 0}},
                                          {0.5, {2, 0, 2}},
                                          {0.5, {0, 2, 0}}}));
  }
  if (name == "one_dim_agent3") {
    return PolyBasis(2, scaled_monomials({{0.5, {2, 0}},
                                          {0.25, {4, 0}},
                                          {0.5, {2, 2}},
                                          {0.25, {4, 2}}}));
  }
  if (name == "one_dim_agent4") {
    // dim 3: [e4, e3, x4]
    return PolyBasis(3, scaled_monomials({{0.5, {2, 0, 0}},
                                          {0.25, {4, 0, 0}},
                                          {0.5, {2, 2, 0}},
                                          {0.5, {2, 0, 2}},
                                          {0.5, {0, 2, 0}}}));
  }
  if (name == "one_dim_agent5") {
    // dim 4: [e5, e3, e4, x5]
    return PolyBasis(4, scaled_monomials({{0.5, {2, 0, 0, 0}},
                                          {0.25, {4, 0, 0, 0}},
                                          {0.5, {2, 0, 2, 0}},
                                          {0.5, {2, 2, 0, 0}},
                                          {0.5, {2, 0, 0, 2}},
                                          {0.5, {0, 2, 2, 0}},
                                          {0.5, {0, 2, 0, 0}},
                                          {0.5, {0, 0, 2, 0}}}));
  }
  throw std::invalid_argument("unknown value basis preset: " + name);
}

DriftBasis polynomial_drift_basis(int max_power) {
  if (max_power < 1) throw std::invalid_argument("need at least power 1");
  DriftBasis basis;
  basis.dim = max_power;
  basis.eval = [max_power](const Vector& x) {
    Vector out(max_power);
    double p = x(0);
    for (int k = 0; k < max_power; ++k) {
      out(k) = p;
      p *= x(0);
    }
    return out;
  };
  return basis;
}

AgentModel one_dim_agent(double theta1, double theta2) {
  AgentModel m;
  m.state_dim = 1;
  m.input_dim = 1;
  m.drift = [theta1, theta2](const Vector& x) {
    return scalar(theta1 * x(0) + theta2 * x(0) * x(0));
  };
  m.effectiveness = [](const Vector& x) {
    return Matrix::Constant(1, 1, std::cos(2.0 * x(0)) + 2.0);
  };
  return m;
}

SimConfig example_1d_config() {
  SimConfig cfg;
  cfg.scenario = "example_1d";
  cfg.leader_formula = "exp(-0.1*t)";
  cfg.dt = 1e-3;
  cfg.t_final = 40.0;
  cfg.decimate = 10;

  const int N = 5;
  // Edges (leader->1), (leader->3), (1->2), (2->1), (3->4), (3->5),
  // (4->5), unit weights and pinning gains.
  cfg.adjacency = Matrix::Zero(N, N);
  cfg.adjacency(1, 0) = 1.0;  // 1 -> 2
  cfg.adjacency(0, 1) = 1.0;  // 2 -> 1
  cfg.adjacency(3, 2) = 1.0;  // 3 -> 4
  cfg.adjacency(4, 2) = 1.0;  // 3 -> 5
  cfg.adjacency(4, 3) = 1.0;  // 4 -> 5
  cfg.pinning = Vector::Zero(N);
  cfg.pinning(0) = 1.0;
  cfg.pinning(2) = 1.0;

  // Offsets consistent with the pairwise targets: x_d12 = 0.5,
  // x_d21 = -0.5, x_d43 = -0.5, x_d53 = -0.5.
  cfg.offsets = {scalar(0.75), scalar(0.25), scalar(1.0), scalar(0.5),
                 scalar(0.5)};

  const double theta1[N] = {0.0, 0.0, 0.1, 0.5, 0.2};
  const double theta2[N] = {1.0, 0.5, 1.0, 1.0, 1.0};
  for (int i = 0; i < N; ++i) {
    cfg.models.agents.push_back(one_dim_agent(theta1[i], theta2[i]));
    Matrix th(2, 1);
    th << theta1[i], theta2[i];
    cfg.theta_true.push_back(th);
    cfg.drift_bases.push_back(polynomial_drift_basis(2));
  }
  cfg.models.leader.state_dim = 1;
  cfg.models.leader.drift = [](const Vector& x) { return -0.1 * x; };
  cfg.models.leader.trajectory = [](double t) {
    return scalar(std::exp(-0.1 * t));
  };
  cfg.models.leader.initial_state = scalar(1.0);
  cfg.models.leader.bound = 10.0;

  for (int i = 0; i < N; ++i)
    cfg.value_bases.push_back(
        value_basis_preset("one_dim_agent" + std::to_string(i + 1)));

  const double k_theta[N] = {30.0, 30.0, 25.0, 20.0, 30.0};
  const double gamma_theta[N] = {1.0, 0.8, 1.0, 1.0, 1.0};
  for (int i = 0; i < N; ++i) {
    AgentConfig a;
    a.q = 10.0;
    a.r = Matrix::Constant(1, 1, 0.1);
    a.eta_c1 = 0.1;
    a.eta_c2 = 10.0;
    a.eta_a1 = 5.0;
    a.eta_a2 = 0.1;
    a.nu = 0.005;
    a.beta = 0.5;
    a.gamma_bar = 1e4;
    a.observer_gain = 500.0;
    a.cl_gain = k_theta[i];
    a.drift_gain = gamma_theta[i];
    a.stack_capacity = 30;
    const int L = cfg.value_bases[i].size();
    const double w0 = i == 4 ? 3.0 : 1.0;
    a.w_c0 = Vector::Constant(L, w0);
    a.w_a0 = Vector::Constant(L, w0);
    a.gamma0 = 500.0;
    a.theta0 = Matrix::Zero(2, 1);
    a.x_init = scalar(2.0);
    a.xhat_init = scalar(0.0);
    cfg.agents.push_back(std::move(a));
  }
  return cfg;
}

SimConfig lqr_scalar_config() {
  SimConfig cfg;
  cfg.scenario = "lqr_scalar";
  cfg.leader_formula = "0";
  cfg.dt = 1e-3;
  cfg.t_final = 12.0;
  cfg.decimate = 10;
  cfg.exact_model = true;

  cfg.adjacency = Matrix::Zero(1, 1);
  cfg.pinning = Vector::Constant(1, 1.0);
  cfg.offsets = {scalar(0.0)};

  AgentModel m;
  m.state_dim = 1;
  m.input_dim = 1;
  m.drift = [](const Vector& x) { return x; };  // f(x) = x
  m.effectiveness = [](const Vector&) { return Matrix::Constant(1, 1, 1.0); };
  cfg.models.agents.push_back(std::move(m));
  Matrix th(2, 1);
  th << 1.0, 0.0;
  cfg.theta_true.push_back(th);
  cfg.drift_bases.push_back(polynomial_drift_basis(2));

  cfg.models.leader.state_dim = 1;
  cfg.models.leader.drift = [](const Vector& x) { return 0.0 * x; };
  cfg.models.leader.trajectory = [](double) { return scalar(0.0); };
  cfg.models.leader.initial_state = scalar(0.0);
  cfg.models.leader.bound = 10.0;

  cfg.value_bases.push_back(value_basis_preset("quad_error"));

  AgentConfig a;
  a.q = 10.0;
  a.r = Matrix::Constant(1, 1, 0.1);
  a.eta_c1 = 0.1;
  a.eta_c2 = 10.0;
  a.eta_a1 = 5.0;
  a.eta_a2 = 0.1;
  a.nu = 0.005;
  a.beta = 0.5;
  a.gamma_bar = 1e4;
  a.observer_gain = 500.0;
  a.cl_gain = 30.0;
  a.drift_gain = 1.0;
  a.stack_capacity = 30;
  a.w_c0 = Vector::Constant(1, 1.0);
  a.w_a0 = Vector::Constant(1, 1.0);
  a.gamma0 = 500.0;
  a.theta0 = th;
  a.x_init = scalar(1.0);
  a.xhat_init = scalar(1.0);
  cfg.agents.push_back(std::move(a));
  return cfg;
}

SimConfig scenario_by_name(const std::string& name) {
  if (name == "example_1d") return example_1d_config();
  if (name == "lqr_scalar") return lqr_scalar_config();
  throw std::invalid_argument("unknown scenario: " + name);
}

}  // namespace graphgame
