#include "graphgame/oracles.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "graphgame/scenario.hpp"
#include "graphgame/sg_filter.hpp"

namespace graphgame {

double scalar_riccati_gain(double a, double q, double r) {
  return r * a + std::sqrt(r * r * a * a + q * r);
}

OracleResult run_lqr_oracle() {
  OracleResult res{"lqr_riccati", false, ""};
  const auto start = std::chrono::steady_clock::now();

  SimConfig cfg = lqr_scalar_config();
  Simulator sim(cfg);
  TraceLog log = sim.run();
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  std::ostringstream detail;
  if (log.aborted) {
    res.detail = "run aborted: " + log.abort_reason;
    return res;
  }

  // Value basis is e^2/2, so the critic weight estimates twice the
  // Riccati gain.
  const double p_ref = scalar_riccati_gain(1.0, 10.0, 0.1);
  const double p_hat = log.w_c[0](log.rows() - 1, 0) / 2.0;
  const double rel_err = std::abs(p_hat - p_ref) / p_ref;

  double max_grid_delta = 0.0;
  for (const GridSample& s : sim.last_grid_samples(0))
    max_grid_delta = std::max(max_grid_delta, std::abs(s.delta));

  detail << "p_hat=" << p_hat << " p_ref=" << p_ref << " rel_err=" << rel_err
         << " max|delta|=" << max_grid_delta << " wall=" << elapsed << "s";
  res.detail = detail.str();
  res.pass = rel_err < 0.05 && max_grid_delta < 1e-4 && elapsed < 10.0;
  return res;
}

OracleResult run_identifier_oracle() {
  OracleResult res{"identifier_convergence", false, ""};
  const auto start = std::chrono::steady_clock::now();

  const DriftBasis basis = polynomial_drift_basis(2);
  Matrix theta_true(2, 1);
  theta_true << 0.5, 1.0;
  AgentModel model = one_dim_agent(0.5, 1.0);

  // Synthetic rank-rich stack recorded from the true system at rest
  // inputs; derivatives are exact.
  HistoryStack stack(10);
  const double xs[] = {-1.5, -1.0, -0.5, 0.5, 1.0, 1.5, 2.0, -2.0, 0.8, -0.8};
  for (double xv : xs) {
    const Vector x = Vector::Constant(1, xv);
    const Vector u = Vector::Zero(1);
    stack.try_insert_svmax(
        make_stack_entry(0.0, x, u, model.drift(x), basis, model));
  }
  const double rank = stack.rank_metric();

  DriftEstimate est(Matrix::Zero(2, 1), Vector::Ones(2), 1.0);
  // Conservative explicit step for the stiffest mode of the linear
  // error system, then integrate to T = 10 / (k sigma_min).
  Matrix gram = Matrix::Zero(2, 2);
  for (const StackEntry& e : stack.entries())
    gram += e.sigma * e.sigma.transpose();
  const double lam_max = gram.norm();
  const double dt = std::min(0.01, 0.5 / lam_max);
  const double horizon = 10.0 / (est.cl_gain * rank);
  const Vector x_probe = Vector::Zero(1);
  const Vector no_error = Vector::Zero(1);
  auto flow = [&](const Matrix& th) {
    DriftEstimate tmp = est;
    tmp.weights = th;
    return cl_update_flow(tmp, stack, x_probe, no_error, basis);
  };
  for (double t = 0.0; t < horizon; t += dt) {
    const Matrix k1 = flow(est.weights);
    const Matrix k2 = flow(est.weights + 0.5 * dt * k1);
    const Matrix k3 = flow(est.weights + 0.5 * dt * k2);
    const Matrix k4 = flow(est.weights + dt * k3);
    est.weights += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  const double err = (est.weights - theta_true).norm();
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  std::ostringstream detail;
  detail << "rank_metric=" << rank << " theta_err=" << err
         << " wall=" << elapsed << "s";
  res.detail = detail.str();
  res.pass = rank > 0.1 && err < 1e-3 && elapsed < 5.0;
  return res;
}

OracleResult run_sg_oracle() {
  OracleResult res{"sg_exactness", false, ""};
  double worst = 0.0;
  const int window = 9;
  const double dt = 0.01;
  for (double center : {0.0, 0.5, 1.7, -2.3}) {
    std::vector<double> samples(window);
    for (int k = 0; k < window; ++k) {
      const double t = center + (k - window / 2) * dt;
      samples[k] = std::pow(t, 5);
    }
    const double got = sg_derivative(samples, dt);
    const double want = 5.0 * std::pow(center, 4);
    const double scale = std::max(1.0, std::abs(want));
    worst = std::max(worst, std::abs(got - want) / scale);
  }
  std::ostringstream detail;
  detail << "max_rel_err=" << worst;
  res.detail = detail.str();
  res.pass = worst <= 1e-8;
  return res;
}

std::vector<OracleResult> run_all_oracles() {
  return {run_lqr_oracle(), run_identifier_oracle(), run_sg_oracle()};
}

}  // namespace graphgame
