#include <doctest.h>

#include <cmath>
#include <sstream>

#include "graphgame/identifier.hpp"
#include "graphgame/sg_filter.hpp"
#include "test_support.hpp"

using namespace graphgame;
using graphgame::testing::scalar;

namespace {

const DriftBasis kBasis = polynomial_drift_basis(2);

StackEntry entry_at(double x, const AgentModel& model, double u = 0.0,
                    double t = 0.0) {
  return make_stack_entry(t, scalar(x), scalar(u),
                          model.drift(scalar(x)) +
                              model.effectiveness(scalar(x)) * scalar(u),
                          kBasis, model);
}

}  // namespace

TEST_CASE("observer flow reproduces the true derivative at zero error") {
  const AgentModel model = one_dim_agent(0.3, 0.9);
  Matrix theta(2, 1);
  theta << 0.3, 0.9;
  StateObserver obs{scalar(1.2), 500.0};
  const Vector u = scalar(-0.4);
  const Vector got = observer_flow(obs, scalar(1.2), u, theta, kBasis, model);
  const Vector want =
      model.drift(scalar(1.2)) + model.effectiveness(scalar(1.2)) * u;
  CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("observer flow: pure feedback term") {
  const AgentModel model = one_dim_agent(0.0, 0.0);
  StateObserver obs{scalar(0.0), 500.0};
  const Vector got = observer_flow(obs, scalar(2.0), scalar(0.0),
                                   Matrix::Zero(2, 1), kBasis, model);
  CHECK(got(0) == doctest::Approx(1000.0).epsilon(1e-13));
}

TEST_CASE("observer flow on experiment agent 4") {
  const AgentModel model = one_dim_agent(0.5, 1.0);
  Matrix theta(2, 1);
  theta << 0.5, 1.0;
  StateObserver obs{scalar(2.0), 500.0};
  const Vector got = observer_flow(obs, scalar(2.0), scalar(0.0), theta,
                                   kBasis, model);
  CHECK(got(0) == doctest::Approx(5.0).epsilon(1e-13));
}

TEST_CASE("weight update vanishes at the true weights with clean data") {
  const AgentModel model = one_dim_agent(0.5, 1.0);
  Matrix theta(2, 1);
  theta << 0.5, 1.0;
  HistoryStack stack(8);
  for (double x : {-1.0, 0.5, 1.5, 2.0})
    stack.try_insert_svmax(entry_at(x, model, 0.3 * x));
  DriftEstimate est(theta, Vector::Ones(2), 2.0);
  const Matrix flow =
      cl_update_flow(est, stack, scalar(0.7), Vector::Zero(1), kBasis);
  CHECK(flow.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("weight update, single recorded sample by hand") {
  // sigma = (x, x^2) at x = 1; residual 1; zero weights; unit gains.
  const AgentModel model = one_dim_agent(0.0, 0.0);
  HistoryStack stack(4);
  StackEntry e;
  e.x = scalar(1.0);
  e.u = scalar(0.0);
  e.xdot = scalar(1.0);
  e.sigma = kBasis.eval(e.x);
  e.gu = Vector::Zero(1);
  stack.try_insert_svmax(e);
  DriftEstimate est(Matrix::Zero(2, 1), Vector::Ones(2), 1.0);
  const Matrix flow =
      cl_update_flow(est, stack, scalar(0.0), Vector::Zero(1), kBasis);
  CHECK(flow(0, 0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(flow(1, 0) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("empty stack leaves only the instantaneous term") {
  HistoryStack stack(4);
  DriftEstimate est(Matrix::Zero(2, 1), Vector::Constant(2, 2.0), 5.0);
  const Matrix flow =
      cl_update_flow(est, stack, scalar(1.0), scalar(0.25), kBasis);
  // Gamma sigma(x) x_tilde^T with sigma(1) = (1, 1).
  CHECK(flow(0, 0) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(flow(1, 0) == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("weight-update flow converges under the rank condition") {
  const AgentModel model = one_dim_agent(0.5, 1.0);
  Matrix theta_true(2, 1);
  theta_true << 0.5, 1.0;
  HistoryStack stack(10);
  for (double x : {-1.5, -1.0, -0.5, 0.5, 1.0, 1.5, 2.0, -2.0})
    stack.try_insert_svmax(entry_at(x, model));
  const double rank = stack.rank_metric();
  REQUIRE(rank > 0.1);

  DriftEstimate est(Matrix::Zero(2, 1), Vector::Ones(2), 1.0);
  Matrix gram = Matrix::Zero(2, 2);
  for (const StackEntry& e : stack.entries())
    gram += e.sigma * e.sigma.transpose();
  const double dt = std::min(0.01, 0.5 / gram.norm());
  const double horizon = 10.0 / (est.cl_gain * rank);
  auto flow = [&](const Matrix& th) {
    DriftEstimate probe = est;
    probe.weights = th;
    return cl_update_flow(probe, stack, scalar(0.0), Vector::Zero(1), kBasis);
  };
  for (double t = 0.0; t < horizon; t += dt) {
    const Matrix k1 = flow(est.weights);
    const Matrix k2 = flow(est.weights + 0.5 * dt * k1);
    const Matrix k3 = flow(est.weights + 0.5 * dt * k2);
    const Matrix k4 = flow(est.weights + dt * k3);
    est.weights += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  CHECK((est.weights - theta_true).norm() < 1e-3);
}

TEST_CASE("stack rank metric") {
  SUBCASE("empty stack") {
    HistoryStack stack(4);
    CHECK(stack_rank_metric(stack) == 0.0);
  }
  SUBCASE("two samples, closed-form smallest eigenvalue") {
    const AgentModel model = one_dim_agent(0.0, 1.0);
    HistoryStack stack(4);
    stack.try_insert_svmax(entry_at(1.0, model));
    stack.try_insert_svmax(entry_at(2.0, model));
    // Gram sum [[5, 9], [9, 17]]: smallest eigenvalue 11 - sqrt(117).
    CHECK(stack_rank_metric(stack) ==
          doctest::Approx(11.0 - std::sqrt(117.0)).epsilon(1e-12));
  }
  SUBCASE("duplicates alone stay rank deficient") {
    const AgentModel model = one_dim_agent(0.0, 1.0);
    HistoryStack stack(2);
    stack.try_insert_svmax(entry_at(1.3, model));
    stack.try_insert_svmax(entry_at(1.3, model));
    CHECK(stack.size() == 2);
    CHECK(stack_rank_metric(stack) <= 1e-12);
  }
}

TEST_CASE("insertion policy") {
  const AgentModel model = one_dim_agent(0.0, 1.0);
  SUBCASE("always accepts while not full") {
    HistoryStack stack(3);
    CHECK(stack.try_insert_svmax(entry_at(0.5, model)));
    CHECK(stack.try_insert_svmax(entry_at(0.5, model)));
    CHECK(stack.size() == 2);
  }
  SUBCASE("rejects a duplicate of an existing sample when full") {
    HistoryStack stack(3);
    StackEntry a, b, c;
    a.sigma = Vector(2);
    a.sigma << 1.0, 0.0;
    b.sigma = Vector(2);
    b.sigma << 0.0, 1.0;
    c.sigma = Vector(2);
    c.sigma << 1.0, 1.0;
    a.x = b.x = c.x = scalar(0.0);
    a.u = b.u = c.u = scalar(0.0);
    a.xdot = b.xdot = c.xdot = scalar(0.0);
    a.gu = b.gu = c.gu = Vector::Zero(1);
    stack.try_insert_svmax(a);
    stack.try_insert_svmax(b);
    stack.try_insert_svmax(c);
    StackEntry dup = a;
    CHECK_FALSE(stack.try_insert_svmax(dup));
  }
  SUBCASE("accepts the swap a brute-force search would pick") {
    HistoryStack stack(3);
    // Nearly collinear samples, then an orthogonal candidate.
    auto vec = [](double a, double b) {
      StackEntry e;
      e.sigma = Vector(2);
      e.sigma << a, b;
      e.x = scalar(0.0);
      e.u = scalar(0.0);
      e.xdot = scalar(0.0);
      e.gu = Vector::Zero(1);
      return e;
    };
    stack.try_insert_svmax(vec(1.0, 0.01));
    stack.try_insert_svmax(vec(1.0, 0.02));
    stack.try_insert_svmax(vec(1.0, 0.03));
    const double before = stack.rank_metric();

    // Brute-force oracle: best achievable metric over all single swaps.
    Vector cand(2);
    cand << 0.0, 1.0;
    double best = before;
    std::vector<Vector> sigmas;
    for (const StackEntry& e : stack.entries()) sigmas.push_back(e.sigma);
    for (size_t j = 0; j < sigmas.size(); ++j) {
      Matrix gram = cand * cand.transpose();
      for (size_t k = 0; k < sigmas.size(); ++k)
        if (k != j) gram += sigmas[k] * sigmas[k].transpose();
      Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
      best = std::max(best, es.eigenvalues()(0));
    }

    CHECK(stack.try_insert_svmax(vec(0.0, 1.0)));
    CHECK(stack.rank_metric() > before);
    CHECK(stack.rank_metric() == doctest::Approx(best).epsilon(1e-12));
  }
  SUBCASE("metric never decreases across a random insertion stream") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    HistoryStack stack(6);
    double last = 0.0;
    for (int k = 0; k < 200; ++k) {
      stack.try_insert_svmax(entry_at(dist(rng), model));
      CHECK(stack.rank_metric() >= last - 1e-15);
      last = stack.rank_metric();
    }
    CHECK(last > 0.0);
  }
}

TEST_CASE("smoothing differentiator") {
  SUBCASE("constant signal has zero derivative") {
    std::vector<double> xs(9, 3.7);
    CHECK(std::abs(sg_derivative(xs, 0.01)) <= 1e-12);
  }
  SUBCASE("exact on degree-5 polynomials") {
    for (int window : {7, 9, 11}) {
      for (double center : {0.0, 1.0, -2.5}) {
        const double dt = 0.05;
        std::vector<double> xs(window);
        for (int k = 0; k < window; ++k) {
          const double t = center + (k - window / 2) * dt;
          xs[k] = std::pow(t, 5) - 2.0 * std::pow(t, 3) + t;
        }
        const double want = 5.0 * std::pow(center, 4) -
                            6.0 * center * center + 1.0;
        const double got = sg_derivative(xs, dt);
        CHECK(std::abs(got - want) <=
              1e-8 * std::max(1.0, std::abs(want)));
      }
    }
  }
  SUBCASE("close to the analytic derivative of a sine") {
    const double dt = 0.01;
    const double center = 0.6;
    std::vector<double> xs(9);
    for (int k = 0; k < 9; ++k) xs[k] = std::sin(center + (k - 4) * dt);
    CHECK(std::abs(sg_derivative(xs, dt) - std::cos(center)) <= 1e-6);
  }
  SUBCASE("rejects bad windows") {
    std::vector<double> xs(5, 1.0);
    CHECK_THROWS_AS(sg_derivative(xs, 0.01), std::invalid_argument);
    std::vector<double> even(8, 1.0);
    CHECK_THROWS_AS(sg_derivative(even, 0.01), std::invalid_argument);
    std::vector<double> t{0.0, 0.01, 0.02, 0.031, 0.04, 0.05, 0.06, 0.07,
                          0.08};
    std::vector<double> v(9, 1.0);
    CHECK_THROWS_AS(sg_derivative(t, v), std::invalid_argument);
  }
}

TEST_CASE("observer error decays exponentially with exact weights") {
  const AgentModel model = one_dim_agent(0.5, 1.0);
  Matrix theta(2, 1);
  theta << 0.5, 1.0;
  const double k = 5.0;
  const double dt = 1e-4;
  double x = -0.3, xhat = 0.7;
  const double tilde0 = x - xhat;
  const double horizon = 1.0;
  auto flow = [&](double xs, double xh) {
    const double f = model.drift(scalar(xs))(0);
    StateObserver obs{scalar(xh), k};
    const double fh = observer_flow(obs, scalar(xs), scalar(0.0), theta,
                                    kBasis, model)(0);
    return std::pair<double, double>(f, fh);
  };
  for (double t = 0.0; t < horizon; t += dt) {
    // Heun step is plenty for the decay bound.
    auto [f1, h1] = flow(x, xhat);
    auto [f2, h2] = flow(x + dt * f1, xhat + dt * h1);
    x += 0.5 * dt * (f1 + f2);
    xhat += 0.5 * dt * (h1 + h2);
  }
  CHECK(std::abs(x - xhat) <=
        std::abs(tilde0) * std::exp(-k * horizon) + 1e-6);
}

TEST_CASE("closed-form batch relaxation matches fine integration") {
  const AgentModel model = one_dim_agent(0.5, 1.0);
  HistoryStack stack(6);
  for (double x : {-1.0, 0.5, 1.5, 2.0, -0.4})
    stack.try_insert_svmax(entry_at(x, model, 0.2));
  Matrix w0(2, 1);
  w0 << -0.3, 0.4;
  DriftEstimate exact(w0, Vector::Constant(2, 0.8), 3.0);
  cl_exact_update(exact, stack, 0.01);

  DriftEstimate fine(w0, Vector::Constant(2, 0.8), 3.0);
  const int substeps = 2000;
  const double h = 0.01 / substeps;
  auto flow = [&](const Matrix& th) {
    DriftEstimate probe = fine;
    probe.weights = th;
    // Batch term only: the probe error is zero.
    return cl_update_flow(probe, stack, scalar(0.0), Vector::Zero(1), kBasis);
  };
  for (int s = 0; s < substeps; ++s) {
    const Matrix k1 = flow(fine.weights);
    const Matrix k2 = flow(fine.weights + 0.5 * h * k1);
    const Matrix k3 = flow(fine.weights + 0.5 * h * k2);
    const Matrix k4 = flow(fine.weights + h * k3);
    fine.weights += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  CHECK((exact.weights - fine.weights).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("history dump lists one line per sample") {
  const AgentModel model = one_dim_agent(0.1, 1.0);
  HistoryStack stack(4);
  stack.try_insert_svmax(entry_at(0.5, model, 0.1, 1.5));
  stack.try_insert_svmax(entry_at(1.0, model, -0.2, 2.5));
  std::ostringstream os;
  dump_history_csv(stack, os);
  const std::string text = os.str();
  CHECK(text.rfind("t,x,u,xdot_est\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}
