#include "graphgame/sim.hpp"

#include <chrono>
#include <cmath>
#include <random>

namespace graphgame {

void SimConfig::validate() const {
  if (dt <= 0.0) throw std::invalid_argument("dt must be positive");
  if (t_final < dt)
    throw std::invalid_argument("t_final must cover at least one step");
  if (decimate < 1) throw std::invalid_argument("decimate must be >= 1");
  if (sg_window < 7 || sg_window % 2 == 0)
    throw std::invalid_argument("sg window must be odd and at least 7");
  if (rank_gate < 0.0) throw std::invalid_argument("rank gate must be >= 0");
  const int N = n_agents();
  if (N < 1) throw std::invalid_argument("scenario has no agents");
  if (models.size() != N || static_cast<int>(offsets.size()) != N ||
      static_cast<int>(drift_bases.size()) != N ||
      static_cast<int>(value_bases.size()) != N)
    throw std::invalid_argument("per-agent data does not match agent count");
  if (adjacency.rows() != N || pinning.size() != N)
    throw std::invalid_argument("topology size does not match agent count");
  for (int i = 0; i < N; ++i) {
    const AgentConfig& a = agents[i];
    if (a.q <= 0.0 || a.eta_c1 <= 0.0 || a.eta_c2 <= 0.0 || a.eta_a1 <= 0.0 ||
        a.eta_a2 <= 0.0 || a.nu <= 0.0 || a.beta <= 0.0 ||
        a.observer_gain <= 0.0 || a.cl_gain <= 0.0 || a.drift_gain <= 0.0)
      throw std::invalid_argument("rate gains must be positive (agent " +
                                  std::to_string(i + 1) + ")");
    if (a.gamma_bar <= 0.0 || a.gamma0 <= 0.0 || a.stack_capacity < 1)
      throw std::invalid_argument("gain bounds must be positive (agent " +
                                  std::to_string(i + 1) + ")");
  }
  if (exact_model && static_cast<int>(theta_true.size()) != N)
    throw std::invalid_argument("exact-model runs need true drift weights");
}

ExtrapolationGrid build_extrapolation_grid(const GridSpec& spec,
                                           const SubgraphIndex& idx,
                                           int state_dim,
                                           unsigned long seed) {
  if (spec.own_error_values.empty() || spec.own_state_values.empty() ||
      spec.neighbor_error_values.empty())
    throw std::invalid_argument("grid axes must be nonempty");
  const int s = idx.size();
  const int dim = state_dim * (s + 1);

  // Axis list: own error, neighbor errors, own state. Every state
  // component of one block shares the axis value.
  std::vector<const std::vector<double>*> axes;
  axes.push_back(&spec.own_error_values);
  for (int k = 1; k < s; ++k) axes.push_back(&spec.neighbor_error_values);
  axes.push_back(&spec.own_state_values);

  long count = 1;
  for (const auto* a : axes) count *= static_cast<long>(a->size());

  ExtrapolationGrid grid;
  grid.points.reserve(count);

  if (spec.randomized) {
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + idx.agent + 1);
    std::vector<std::uniform_real_distribution<double>> dists;
    for (const auto* a : axes) {
      const auto [lo, hi] = std::minmax_element(a->begin(), a->end());
      dists.emplace_back(*lo, *hi);
    }
    for (long p = 0; p < count; ++p) {
      Vector point(dim);
      for (size_t ax = 0; ax < axes.size(); ++ax)
        point.segment(ax * state_dim, state_dim)
            .setConstant(dists[ax](rng));
      grid.points.push_back(std::move(point));
    }
    return grid;
  }

  std::vector<size_t> digit(axes.size(), 0);
  for (long p = 0; p < count; ++p) {
    Vector point(dim);
    for (size_t ax = 0; ax < axes.size(); ++ax)
      point.segment(ax * state_dim, state_dim)
          .setConstant((*axes[ax])[digit[ax]]);
    grid.points.push_back(std::move(point));
    for (int ax = static_cast<int>(axes.size()) - 1; ax >= 0; --ax) {
      if (++digit[ax] < axes[ax]->size()) break;
      digit[ax] = 0;
    }
  }
  return grid;
}

std::unique_ptr<GameSystem> build_system(const SimConfig& cfg) {
  std::vector<CostSpec> costs;
  for (int i = 0; i < cfg.n_agents(); ++i)
    costs.push_back(CostSpec::quadratic(cfg.agents[i].q, cfg.agents[i].r));
  return std::make_unique<GameSystem>(
      DirectedNetwork(cfg.adjacency, cfg.pinning, cfg.normalize_weights),
      cfg.models, FormationSpec{cfg.offsets}, cfg.drift_bases,
      cfg.value_bases, std::move(costs));
}

Simulator::Simulator(SimConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  const int N = cfg_.n_agents();
  const int n = cfg_.models.state_dim();

  sys_ = build_system(cfg_);

  if (cfg_.exact_model)
    for (int i = 0; i < N; ++i) cfg_.agents[i].theta0 = cfg_.theta_true[i];

  layout_.resize(N);
  int off = 0;
  for (int i = 0; i < N; ++i) {
    Layout& lo = layout_[i];
    lo.L = sys_->value_bases[i].size();
    lo.p1 = sys_->drift_bases[i].dim;
    const AgentConfig& a = cfg_.agents[i];
    if (a.w_c0.size() != lo.L || a.w_a0.size() != lo.L)
      throw std::invalid_argument("initial weights do not match basis size");
    if (a.theta0.rows() != lo.p1 || a.theta0.cols() != n)
      throw std::invalid_argument("initial drift weights have wrong shape");
    if (a.x_init.size() != n || a.xhat_init.size() != n)
      throw std::invalid_argument("initial states have wrong dimension");
    lo.x = off;
    off += n;
    lo.xhat = off;
    off += n;
    lo.theta = off;
    off += lo.p1 * n;
    lo.wc = off;
    off += lo.L;
    lo.wa = off;
    off += lo.L;
    lo.gamma = off;
    off += lo.L * lo.L;
  }
  if (!cfg_.models.leader.trajectory) {
    leader_offset_ = off;
    off += n;
  }
  state_size_ = off;

  weights_.theta.resize(N);
  weights_.w_c.resize(N);
  weights_.w_a.resize(N);

  grids_.resize(N);
  grid_eval_.resize(N);
  grid_samples_.resize(N);
  rank_trackers_.resize(N);
  for (int i = 0; i < N; ++i) {
    grids_[i] = build_extrapolation_grid(cfg_.grid, sys_->subgraph(i), n,
                                         cfg_.seed);
    grid_eval_[i].resize(grids_[i].count());
    grid_samples_[i].resize(grids_[i].count());
    for (int k = 0; k < grids_[i].count(); ++k) {
      GridPointEval& gp = grid_eval_[i][k];
      gp.eval = std::make_unique<GameEval>(*sys_, i, grids_[i].points[k]);
      gp.omega.resize(layout_[i].L);
    }
  }

  for (int i = 0; i < N; ++i) {
    stacks_.emplace_back(cfg_.agents[i].stack_capacity);
    windows_.emplace_back();
  }
  sg_error_max_.assign(N, 0.0);
  sg_weights_ = sg_derivative_weights(cfg_.sg_window, cfg_.dt);
}

Vector Simulator::leader_state(double t) const {
  if (cfg_.models.leader.trajectory) return cfg_.models.leader.trajectory(t);
  throw std::logic_error(
      "leader has no closed-form trajectory; state is integrated");
}

Vector Simulator::initial_state() const {
  Vector y = Vector::Zero(state_size_);
  const int n = cfg_.models.state_dim();
  for (int i = 0; i < cfg_.n_agents(); ++i) {
    const Layout& lo = layout_[i];
    const AgentConfig& a = cfg_.agents[i];
    y.segment(lo.x, n) = a.x_init;
    y.segment(lo.xhat, n) = a.xhat_init;
    Eigen::Map<Matrix>(y.data() + lo.theta, lo.p1, n) = a.theta0;
    y.segment(lo.wc, lo.L) = a.w_c0;
    y.segment(lo.wa, lo.L) = a.w_a0;
    Eigen::Map<Matrix>(y.data() + lo.gamma, lo.L, lo.L) =
        a.gamma0 * Matrix::Identity(lo.L, lo.L);
  }
  if (leader_offset_ >= 0)
    y.segment(leader_offset_, n) = cfg_.models.leader.initial_state;
  return y;
}

Vector Simulator::agent_x(const Vector& y, int i) const {
  return y.segment(layout_[i].x, cfg_.models.state_dim());
}
Vector Simulator::agent_xhat(const Vector& y, int i) const {
  return y.segment(layout_[i].xhat, cfg_.models.state_dim());
}
Matrix Simulator::agent_theta(const Vector& y, int i) const {
  return Eigen::Map<const Matrix>(y.data() + layout_[i].theta, layout_[i].p1,
                                  cfg_.models.state_dim());
}
Vector Simulator::agent_wc(const Vector& y, int i) const {
  return y.segment(layout_[i].wc, layout_[i].L);
}
Vector Simulator::agent_wa(const Vector& y, int i) const {
  return y.segment(layout_[i].wa, layout_[i].L);
}
Matrix Simulator::agent_gamma(const Vector& y, int i) const {
  return Eigen::Map<const Matrix>(y.data() + layout_[i].gamma, layout_[i].L,
                                  layout_[i].L);
}

void Simulator::unpack_weights(const Vector& y, NetworkWeights& w) const {
  const int n = cfg_.models.state_dim();
  for (int i = 0; i < cfg_.n_agents(); ++i) {
    const Layout& lo = layout_[i];
    w.theta[i] =
        Eigen::Map<const Matrix>(y.data() + lo.theta, lo.p1, n);
    w.w_c[i] = y.segment(lo.wc, lo.L);
    w.w_a[i] = y.segment(lo.wa, lo.L);
  }
}

CriticState Simulator::critic_view(const Vector& y, int i) const {
  const Layout& lo = layout_[i];
  const AgentConfig& a = cfg_.agents[i];
  CriticState c;
  c.weights = y.segment(lo.wc, lo.L);
  c.gain = Eigen::Map<const Matrix>(y.data() + lo.gamma, lo.L, lo.L);
  c.gain_bound = a.gamma_bar;
  c.normalization = a.nu;
  c.rate_state = a.eta_c1;
  c.rate_grid = a.eta_c2;
  c.forgetting = a.beta;
  return c;
}

ActorState Simulator::actor_view(const Vector& y, int i) const {
  const Layout& lo = layout_[i];
  ActorState a;
  a.weights = y.segment(lo.wa, lo.L);
  a.rate_consensus = cfg_.agents[i].eta_a1;
  a.rate_decay = cfg_.agents[i].eta_a2;
  return a;
}

bool Simulator::cl_gate_open(int i) const {
  return stacks_[i].rank_metric() > cfg_.rank_gate;
}

void Simulator::refresh_grid(int i, const NetworkWeights& w, const Vector& y,
                             std::vector<GridSample>& samples) const {
  const int L = layout_[i].L;
  const auto gamma =
      Eigen::Map<const Matrix>(y.data() + layout_[i].gamma, L, L);
  const double nu = cfg_.agents[i].nu;
  if (rho_tmp_.size() < L) rho_tmp_.resize(L);
  auto tmp = rho_tmp_.head(L);
  for (size_t k = 0; k < grid_eval_[i].size(); ++k) {
    GridPointEval& gp = grid_eval_[i][k];
    gp.eval->bellman(i, w, gp.omega, gp.delta);
    tmp.noalias() = gamma * gp.omega;
    gp.rho = 1.0 + nu * gp.omega.dot(tmp);
    samples[k] = {&gp.omega, &gp.eval->policy_quadratic(i), gp.rho, gp.delta};
  }
}

Vector Simulator::network_flow(double t, const Vector& y,
                               FlowDiagnostics* diag) const {
  const int N = cfg_.n_agents();
  const int n = cfg_.models.state_dim();

  const Vector x0 = leader_offset_ >= 0
                        ? Vector(y.segment(leader_offset_, n))
                        : cfg_.models.leader.trajectory(t);
  if (x0.norm() > cfg_.models.leader.bound)
    throw NumericalAbort("leader trajectory exceeded its configured bound");

  std::vector<Vector> states(N);
  for (int i = 0; i < N; ++i) states[i] = y.segment(layout_[i].x, n);

  unpack_weights(y, weights_);
  const GameEval eval(*sys_, states, x0);

  std::vector<Vector> controls(N);
  for (int i = 0; i < N; ++i) controls[i] = eval.control(i, weights_);

  Vector deriv = Vector::Zero(state_size_);
  Vector omega_t;
  for (int i = 0; i < N; ++i) {
    const Layout& lo = layout_[i];
    const AgentModel& model = cfg_.models.agents[i];
    const AgentConfig& acfg = cfg_.agents[i];
    const Vector& x = states[i];
    const Vector xhat = y.segment(lo.xhat, n);

    // Plant and observer.
    deriv.segment(lo.x, n) =
        model.drift(x) + model.effectiveness(x) * controls[i];
    StateObserver obs{xhat, acfg.observer_gain};
    deriv.segment(lo.xhat, n) = observer_flow(
        obs, x, controls[i], weights_.theta[i], sys_->drift_bases[i], model);

    // Identifier weights.
    if (!cfg_.exact_model) {
      auto dtheta = Eigen::Map<Matrix>(deriv.data() + lo.theta, lo.p1, n);
      const Vector x_tilde = x - xhat;
      if (cfg_.cl_integration == ClIntegration::Rk4 && cl_gate_open(i)) {
        DriftEstimate est(weights_.theta[i],
                          Vector::Constant(lo.p1, acfg.drift_gain),
                          acfg.cl_gain);
        dtheta = cl_update_flow(est, stacks_[i], x, x_tilde,
                                sys_->drift_bases[i]);
      } else {
        dtheta = acfg.drift_gain *
                 (sys_->drift_bases[i].eval(x) * x_tilde.transpose());
      }
    }

    // Critic and actor.
    const CriticState critic = critic_view(y, i);
    double delta_t = 0.0;
    omega_t.resize(lo.L);
    eval.bellman(i, weights_, omega_t, delta_t);
    const double rho_t = regressor_normalizer(omega_t, critic);
    refresh_grid(i, weights_, y, grid_samples_[i]);

    const CriticFlow cf =
        critic_flow(critic, omega_t, rho_t, delta_t, grid_samples_[i]);
    deriv.segment(lo.wc, lo.L) = cf.weights_dot;
    Eigen::Map<Matrix>(deriv.data() + lo.gamma, lo.L, lo.L) = cf.gain_dot;
    deriv.segment(lo.wa, lo.L) =
        actor_flow(actor_view(y, i), critic, eval.policy_quadratic(i),
                   omega_t, rho_t, grid_samples_[i]);

    if (diag) {
      diag->u[i] = controls[i];
      diag->mu_hat[i] = eval.policy(i, weights_);
      diag->e[i] = eval.error(i);
      diag->delta[i] = delta_t;
    }
  }
  if (leader_offset_ >= 0)
    deriv.segment(leader_offset_, n) = cfg_.models.leader.drift(x0);
  return deriv;
}

Vector Simulator::rk4_step(double t, const Vector& y) const {
  Vector next = rk4_step_generic(
      [this](double ts, const Vector& ys) { return network_flow(ts, ys); }, t,
      y, cfg_.dt);
  if (!next.allFinite())
    throw NumericalAbort("non-finite state after integration step");
  return next;
}

Vector Simulator::rk4_step(double t, const Vector& y, const Vector& k1) const {
  const double h = cfg_.dt;
  const Vector k2 = network_flow(t + 0.5 * h, y + (0.5 * h) * k1);
  const Vector k3 = network_flow(t + 0.5 * h, y + (0.5 * h) * k2);
  const Vector k4 = network_flow(t + h, y + h * k3);
  Vector next = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!next.allFinite())
    throw NumericalAbort("non-finite state after integration step");
  return next;
}

void Simulator::push_sample(double t, const Vector& y,
                            const FlowDiagnostics& diag) {
  const int n = cfg_.models.state_dim();
  const int w = cfg_.sg_window;
  for (int i = 0; i < cfg_.n_agents(); ++i) {
    SampleWindow& win = windows_[i];
    win.t.push_back(t);
    win.x.push_back(y.segment(layout_[i].x, n));
    win.u.push_back(diag.u[i]);
    if (static_cast<int>(win.t.size()) < w) continue;
    // Differentiate at the window center, pair with the center sample.
    Vector xdot = Vector::Zero(n);
    for (int k = 0; k < w; ++k) xdot += sg_weights_(k) * win.x[k];
    const int c = w / 2;
    const AgentModel& model = cfg_.models.agents[i];
    // Derivative-quality diagnostic against the true flow (known to the
    // simulator, never to the learners).
    const Vector true_dot =
        model.drift(win.x[c]) + model.effectiveness(win.x[c]) * win.u[c];
    sg_error_max_[i] =
        std::max(sg_error_max_[i], (xdot - true_dot).cwiseAbs().maxCoeff());
    stacks_[i].try_insert_svmax(make_stack_entry(win.t[c], win.x[c], win.u[c],
                                                 xdot, sys_->drift_bases[i],
                                                 model));
    win.t.pop_front();
    win.x.pop_front();
    win.u.pop_front();
  }
}

void Simulator::apply_discrete_updates(double /*t_new*/, Vector& y) {
  const int n = cfg_.models.state_dim();
  for (int i = 0; i < cfg_.n_agents(); ++i) {
    const Layout& lo = layout_[i];
    const AgentConfig& acfg = cfg_.agents[i];

    if (!cfg_.exact_model && cfg_.cl_integration == ClIntegration::Exact &&
        cl_gate_open(i)) {
      DriftEstimate est(
          Eigen::Map<const Matrix>(y.data() + lo.theta, lo.p1, n),
          Vector::Constant(lo.p1, acfg.drift_gain), acfg.cl_gain);
      cl_exact_update(est, stacks_[i], cfg_.dt);
      Eigen::Map<Matrix>(y.data() + lo.theta, lo.p1, n) = est.weights;
    }

    // Keep the least-squares gain symmetric and inside its bound; the
    // flow indicator alone lets a discrete step overshoot the cap.
    auto gamma = Eigen::Map<Matrix>(y.data() + lo.gamma, lo.L, lo.L);
    gamma = 0.5 * (gamma + gamma.transpose()).eval();
    const double cap =
        std::max(acfg.gamma0 * std::sqrt(static_cast<double>(lo.L)),
                 acfg.gamma_bar);
    const double norm = gamma.norm();
    if (norm > cap) gamma *= cap / norm;
    if (Eigen::LLT<Matrix>(gamma).info() != Eigen::Success)
      throw NumericalAbort("least-squares gain lost positive definiteness"
                           " (agent " + std::to_string(i + 1) + ")");
  }
}

TraceLog Simulator::run() {
  const auto t_start = std::chrono::steady_clock::now();
  const int N = cfg_.n_agents();
  const int n = cfg_.models.state_dim();
  const long n_steps = std::llround(cfg_.t_final / cfg_.dt);
  const long n_rows = n_steps / cfg_.decimate + 1;

  TraceLog log;
  log.n_agents = N;
  log.t.reserve(n_rows);
  log.x.resize(n_rows, N * n);
  log.e.resize(n_rows, N * n);
  log.u.resize(n_rows, N);
  log.mu.resize(n_rows, N);
  log.delta.resize(n_rows, N);
  for (int i = 0; i < N; ++i) {
    log.w_c.emplace_back(n_rows, layout_[i].L);
    log.w_a.emplace_back(n_rows, layout_[i].L);
    log.theta.emplace_back(n_rows, layout_[i].p1 * n);
  }
  log.rho_lower.assign(N, 0.0);
  log.sigma_lower.assign(N, 0.0);
  log.sg_error_max.assign(N, 0.0);
  log.gamma_norm_max.assign(N, 0.0);
  log.gamma_norm_cap.assign(N, 0.0);
  for (int i = 0; i < N; ++i)
    log.gamma_norm_cap[i] =
        std::max(cfg_.agents[i].gamma0 *
                     std::sqrt(static_cast<double>(layout_[i].L)),
                 cfg_.agents[i].gamma_bar);

  FlowDiagnostics diag;
  diag.u.resize(N);
  diag.mu_hat.resize(N);
  diag.e.resize(N);
  diag.delta.resize(N);

  Vector y = initial_state();
  long row = 0;

  auto log_row = [&](double t, const Vector& state) {
    const Vector x0 = leader_offset_ >= 0
                          ? Vector(state.segment(leader_offset_, n))
                          : cfg_.models.leader.trajectory(t);
    std::vector<Vector> states(N);
    for (int i = 0; i < N; ++i) states[i] = state.segment(layout_[i].x, n);
    log.t.push_back(t);
    for (int i = 0; i < N; ++i) {
      log.x.block(row, i * n, 1, n) = states[i].transpose();
      log.e.block(row, i * n, 1, n) = diag.e[i].transpose();
      log.u(row, i) = diag.u[i](0);
      log.delta(row, i) = diag.delta[i];
      log.w_c[i].row(row) = state.segment(layout_[i].wc, layout_[i].L);
      log.w_a[i].row(row) = state.segment(layout_[i].wa, layout_[i].L);
      log.theta[i].row(row) =
          state.segment(layout_[i].theta, layout_[i].p1 * n);
      const double gn = agent_gamma(state, i).norm();
      log.gamma_norm_max[i] = std::max(log.gamma_norm_max[i], gn);
      rank_trackers_[i].add_sample(grid_samples_[i]);
      // Realized control error from the applied inputs and true models.
      Vector mu = Vector::Zero(cfg_.models.agents[i].input_dim);
      const double a0 = sys_->net.pinning_gain(i);
      if (a0 > 0.0) {
        const auto rel = relative_control_terms(i, kLeader, x0,
                                                sys_->formation, sys_->models);
        mu += a0 * (diag.u[i] - rel.f);
      }
      for (int j : sys_->net.in_neighbors(i)) {
        const auto rel = relative_control_terms(i, j, states[j],
                                                sys_->formation, sys_->models);
        mu += sys_->net.edge_weight(i, j) *
              (diag.u[i] - rel.f - rel.g * diag.u[j]);
      }
      log.mu(row, i) = mu(0);
    }
    ++row;
  };

  try {
    for (long step = 0; step <= n_steps; ++step) {
      const double t = static_cast<double>(step) * cfg_.dt;
      const Vector k1 = network_flow(t, y, &diag);  // refreshes grid samples
      if (step % cfg_.decimate == 0) log_row(t, y);
      if (step == n_steps) break;
      push_sample(t, y, diag);
      y = rk4_step(t, y, k1);
      apply_discrete_updates(t + cfg_.dt, y);
    }
  } catch (const std::runtime_error& err) {
    log.aborted = true;
    log.abort_reason = err.what();
  }

  const long used = row;
  log.x.conservativeResize(used, Eigen::NoChange);
  log.e.conservativeResize(used, Eigen::NoChange);
  log.u.conservativeResize(used, Eigen::NoChange);
  log.mu.conservativeResize(used, Eigen::NoChange);
  log.delta.conservativeResize(used, Eigen::NoChange);
  for (int i = 0; i < N; ++i) {
    log.w_c[i].conservativeResize(used, Eigen::NoChange);
    log.w_a[i].conservativeResize(used, Eigen::NoChange);
    log.theta[i].conservativeResize(used, Eigen::NoChange);
    log.rho_lower[i] = rank_trackers_[i].value();
    log.sigma_lower[i] = stacks_[i].rank_metric();
    log.sg_error_max[i] = sg_error_max_[i];
  }
  log.wall_seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - t_start)
                         .count();
  return log;
}

double Simulator::steady_state_residual(int samples) const {
  if (!cfg_.models.leader.trajectory) return 0.0;
  double worst = 0.0;
  for (int s = 0; s <= samples; ++s) {
    const double t = cfg_.t_final * s / samples;
    const Vector x0 = cfg_.models.leader.trajectory(t);
    const Vector xdot0 = cfg_.models.leader.drift(x0);
    for (int i = 0; i < cfg_.n_agents(); ++i) {
      // Steady-state control of i relative to the leader, then relative
      // to each neighbor sitting on its own desired position.
      const auto hold = [&](int j, const Vector& x_j, const Vector& u_j) {
        const auto rel =
            relative_control_terms(i, j, x_j, sys_->formation, sys_->models);
        const Vector u_ij =
            rel.g.cols() > 0 ? Vector(rel.f + rel.g * u_j) : rel.f;
        const Vector x_at = x_j + sys_->formation.relative(i, j);
        const Vector resid = cfg_.models.agents[i].drift(x_at) +
                             cfg_.models.agents[i].effectiveness(x_at) * u_ij -
                             xdot0;
        return resid.cwiseAbs().maxCoeff();
      };
      worst = std::max(worst, hold(kLeader, x0, Vector()));
      for (int j : sys_->net.in_neighbors(i)) {
        const Vector x_j = sys_->formation.offset(j) + x0;
        const auto rel_j = relative_control_terms(j, kLeader, x0,
                                                  sys_->formation,
                                                  sys_->models);
        worst = std::max(worst, hold(j, x_j, rel_j.f));
      }
    }
  }
  return worst;
}

TraceLog run(const SimConfig& cfg) {
  Simulator sim(cfg);
  return sim.run();
}

}  // namespace graphgame
