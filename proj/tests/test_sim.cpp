#include <doctest.h>

#include <cmath>

#include "graphgame/oracles.hpp"
#include "graphgame/trace_io.hpp"
#include "test_support.hpp"

using namespace graphgame;
using graphgame::testing::scalar;

TEST_CASE("leader trajectory of the five-agent scenario") {
  Simulator sim(example_1d_config());
  CHECK(sim.leader_state(0.0)(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sim.leader_state(10.0)(0) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  double last = 2.0;
  for (double t = 0.0; t < 50.0; t += 2.5) {
    const double v = sim.leader_state(t)(0);
    CHECK(v < last);
    CHECK(v > 0.0);
    last = v;
  }
}

TEST_CASE("extrapolation grid sizes follow the axis product") {
  const SimConfig cfg = example_1d_config();
  Simulator sim(cfg);
  const int expect[5] = {45, 45, 15, 45, 135};
  for (int i = 0; i < 5; ++i) CHECK(sim.grid(i).count() == expect[i]);

  SUBCASE("single member uses own error and state axes only") {
    const auto sys = build_system(cfg);
    const auto grid =
        build_extrapolation_grid(cfg.grid, sys->subgraph(2), 1, 0);
    CHECK(grid.count() == 15);
  }
  SUBCASE("degenerate one-value axes give a single point") {
    GridSpec spec;
    spec.own_error_values = {0.5};
    spec.own_state_values = {1.0};
    spec.neighbor_error_values = {0.0};
    const auto sys = build_system(cfg);
    const auto grid = build_extrapolation_grid(spec, sys->subgraph(4), 1, 0);
    CHECK(grid.count() == 1);
    CHECK(grid.points[0].size() == 4);
    CHECK(grid.points[0](0) == 0.5);   // own error
    CHECK(grid.points[0](1) == 0.0);   // neighbor errors
    CHECK(grid.points[0](2) == 0.0);
    CHECK(grid.points[0](3) == 1.0);   // own state
  }
  SUBCASE("randomized placement is deterministic in the seed") {
    GridSpec spec;
    spec.randomized = true;
    const auto sys = build_system(cfg);
    const auto g1 = build_extrapolation_grid(spec, sys->subgraph(4), 1, 7);
    const auto g2 = build_extrapolation_grid(spec, sys->subgraph(4), 1, 7);
    const auto g3 = build_extrapolation_grid(spec, sys->subgraph(4), 1, 8);
    CHECK(g1.count() == 135);
    REQUIRE(g2.count() == g1.count());
    bool same = true, differs = false;
    for (int k = 0; k < g1.count(); ++k) {
      same = same && (g1.points[k] - g2.points[k]).norm() == 0.0;
      differs = differs || (g1.points[k] - g3.points[k]).norm() > 0.0;
    }
    CHECK(same);
    CHECK(differs);
  }
}

TEST_CASE("generic integrator step") {
  SUBCASE("exponential decay to the classical accuracy") {
    auto flow = [](double, const Vector& y) { return Vector(-y); };
    const Vector y1 = rk4_step_generic(flow, 0.0, scalar(1.0), 0.1);
    CHECK(y1(0) == doctest::Approx(0.9048375).epsilon(1e-7));
  }
  SUBCASE("zero flow is the identity") {
    auto flow = [](double, const Vector& y) {
      return Vector(Vector::Zero(y.size()));
    };
    const Vector y1 = rk4_step_generic(flow, 3.0, scalar(-2.5), 0.4);
    CHECK(y1(0) == -2.5);
  }
  SUBCASE("polynomial-in-time flows integrate exactly") {
    auto flow = [](double t, const Vector&) {
      return Vector(scalar(3.0 * t * t));
    };
    Vector y = scalar(0.0);
    double t = 0.0;
    for (int k = 0; k < 10; ++k, t += 0.25)
      y = rk4_step_generic(flow, t, y, 0.25);
    CHECK(y(0) == doctest::Approx(t * t * t).epsilon(1e-13));
  }
}

TEST_CASE("closed-loop flow matches the analytic linear-quadratic loop") {
  SimConfig cfg = lqr_scalar_config();
  Simulator sim(cfg);
  const double p = scalar_riccati_gain(1.0, 10.0, 0.1);

  // Place the critic and actor at the closed-form solution.
  Vector y2 = sim.initial_state();
  // Layout per agent: x, xhat, theta(2), wc, wa, gamma.
  y2(0) = 0.8;         // x
  y2(1) = 0.8;         // xhat
  y2(4) = 2.0 * p;     // wc
  y2(5) = 2.0 * p;     // wa
  const Vector deriv = sim.network_flow(0.0, y2);
  // xdot = (a - p/r) x with a = 1, r = 0.1.
  CHECK(deriv(0) ==
        doctest::Approx((1.0 - p / 0.1) * 0.8).epsilon(1e-8));
  // The Bellman errors vanish at the solution, so the critic rests; the
  // actor keeps a bounded pull toward its offset equilibrium.
  CHECK(std::abs(deriv(4)) <= 1e-9);
  CHECK(std::abs(deriv(5)) <= 6.0);
}

TEST_CASE("critic and identifier rest where the errors vanish") {
  SimConfig cfg = lqr_scalar_config();
  const double p = scalar_riccati_gain(1.0, 10.0, 0.1);
  cfg.agents[0].w_c0 = Vector::Constant(1, 2.0 * p);
  cfg.agents[0].w_a0 = Vector::Constant(1, 2.0 * p);
  Simulator sim(cfg);
  Vector y = sim.initial_state();
  // delta vanishes identically on and off trajectory, so the critic
  // weight flow is zero up to cancellation noise; the drift weights are
  // pinned.
  const Vector deriv = sim.network_flow(0.0, y);
  CHECK(std::abs(deriv(4)) <= 1e-9);

  const Vector y1 = sim.rk4_step(0.0, y);
  CHECK((sim.agent_theta(y1, 0) - sim.agent_theta(y, 0)).norm() == 0.0);
  // Across a step the actor's pull shifts the later stages, so the
  // critic moves only at second order in the step size.
  CHECK(std::abs(sim.agent_wc(y1, 0)(0) - 2.0 * p) <=
        10.0 * cfg.dt * cfg.dt);
  CHECK(std::abs(sim.agent_wa(y1, 0)(0) - 2.0 * p) <= cfg.dt * 6.0);
}

TEST_CASE("observer error contracts by the integrator stability factor") {
  // With exact drift weights the observer error is a pure linear decay,
  // so one step must reproduce the classical fourth-order update of
  // dy/dt = -k y exactly.
  SimConfig cfg = lqr_scalar_config();
  cfg.dt = 0.01;
  cfg.agents[0].observer_gain = 10.0;  // k dt = 0.1
  cfg.agents[0].xhat_init = scalar(0.0);
  cfg.agents[0].x_init = scalar(1.0);
  Simulator sim(cfg);
  const Vector y = sim.initial_state();
  const Vector y1 = sim.rk4_step(0.0, y);
  const double tilde0 = 1.0;
  const double tilde1 = sim.agent_x(y1, 0)(0) - sim.agent_xhat(y1, 0)(0);
  CHECK(tilde1 / tilde0 == doctest::Approx(0.9048375).epsilon(1e-9));
}

TEST_CASE("five-agent first step stays finite and bounded") {
  SimConfig cfg = example_1d_config();
  Simulator sim(cfg);
  const Vector y = sim.initial_state();
  FlowDiagnostics diag;
  diag.u.resize(5);
  diag.mu_hat.resize(5);
  diag.e.resize(5);
  diag.delta.resize(5);
  const Vector deriv = sim.network_flow(0.0, y, &diag);
  CHECK(deriv.allFinite());
  for (int i = 0; i < 5; ++i) {
    CHECK(std::abs(diag.u[i](0)) < 100.0);
    CHECK(std::isfinite(diag.delta[i]));
  }
  const Vector y1 = sim.rk4_step(0.0, y);
  CHECK(y1.allFinite());
}

TEST_CASE("zero-horizon run logs exactly the initial conditions") {
  SimConfig cfg = example_1d_config();
  cfg.t_final = cfg.dt;
  Simulator sim(cfg);
  const TraceLog log = sim.run();
  REQUIRE(log.rows() == 1);
  CHECK(log.t[0] == 0.0);
  for (int i = 0; i < 5; ++i) CHECK(log.x(0, i) == 2.0);
  CHECK_FALSE(log.aborted);
}

TEST_CASE("identical configurations yield identical traces") {
  SimConfig cfg = example_1d_config();
  cfg.t_final = 0.5;
  const TraceLog a = run(cfg);
  const TraceLog b = run(cfg);
  CHECK(trace_to_csv(a) == trace_to_csv(b));
}

TEST_CASE("halving the step shrinks the error at fourth order") {
  auto make = [](double dt) {
    SimConfig cfg = lqr_scalar_config();
    cfg.dt = dt;
    cfg.t_final = 2.0;
    cfg.decimate = 1;
    // Gentle gains so the coarsest step stays inside the stability
    // region, and a large gain bound so the saturation indicator stays
    // constant: the flow is then smooth over the whole horizon.
    cfg.agents[0].gamma_bar = 1e9;
    cfg.agents[0].beta = 0.1;
    cfg.agents[0].gamma0 = 1.0;
    cfg.agents[0].observer_gain = 5.0;
    cfg.agents[0].eta_c1 = 0.05;
    cfg.agents[0].eta_c2 = 0.5;
    cfg.agents[0].eta_a1 = 1.0;
    return cfg;
  };
  auto final_state = [&](double dt) {
    Simulator sim(make(dt));
    Vector y = sim.initial_state();
    const long steps = std::llround(2.0 / dt);
    for (long k = 0; k < steps; ++k)
      y = sim.rk4_step(k * dt, y);
    return y;
  };
  const Vector ref = final_state(0.00125);
  const double e1 = (final_state(0.02) - ref).norm();
  const double e2 = (final_state(0.01) - ref).norm();
  CHECK(e1 / e2 >= 14.0);
}

TEST_CASE("short five-agent run keeps every monitored quantity bounded") {
  SimConfig cfg = example_1d_config();
  cfg.t_final = 2.0;
  Simulator sim(cfg);
  const TraceLog log = sim.run();
  REQUIRE_FALSE(log.aborted);
  CHECK(log.x.allFinite());
  CHECK(log.e.allFinite());
  for (int i = 0; i < 5; ++i) {
    CHECK(log.w_c[i].allFinite());
    CHECK(log.w_a[i].allFinite());
    CHECK(log.theta[i].allFinite());
    CHECK(log.gamma_norm_max[i] <= log.gamma_norm_cap[i] + 1e-9);
  }
  // Total error shrinks relative to the start.
  double first = 0.0, last = 0.0;
  for (int i = 0; i < 5; ++i) {
    first += std::abs(log.e(0, i));
    last += std::abs(log.e(log.rows() - 1, i));
  }
  CHECK(last < first);
}

TEST_CASE("runaway gains abort with a partial trace") {
  SimConfig cfg = lqr_scalar_config();
  cfg.exact_model = false;
  cfg.agents[0].theta0 = Matrix::Zero(2, 1);
  cfg.agents[0].observer_gain = 1e8;  // far outside the stability region
  cfg.t_final = 1.0;
  const TraceLog log = run(cfg);
  CHECK(log.aborted);
  CHECK(log.rows() >= 1);
  CHECK_FALSE(log.abort_reason.empty());
}

TEST_CASE("configuration invariants are enforced") {
  SimConfig cfg = example_1d_config();
  SUBCASE("zero step size") {
    cfg.dt = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
  SUBCASE("negative rate gain") {
    cfg.agents[2].eta_c2 = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
  SUBCASE("horizon shorter than a step") {
    cfg.t_final = cfg.dt / 2.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
  SUBCASE("even filter window") {
    cfg.sg_window = 8;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
}

TEST_CASE("steady-state residual of the built-in scenarios is negligible") {
  CHECK(Simulator(example_1d_config()).steady_state_residual() <= 1e-9);
  CHECK(Simulator(lqr_scalar_config()).steady_state_residual() <= 1e-9);
}
