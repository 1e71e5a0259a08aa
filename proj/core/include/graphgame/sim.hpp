#pragma once

#include <deque>
#include <memory>
#include <string>

#include "graphgame/actor_critic.hpp"
#include "graphgame/identifier.hpp"
#include "graphgame/sg_filter.hpp"
#include "graphgame/system.hpp"

namespace graphgame {

/// How the batch weight-update term is integrated. The batch term is a
/// stiff linear flow once the stack is rich; `Exact` relaxes it in closed
/// form between steps so the fixed-step integrator stays stable, `Rk4`
/// keeps it inside the stage evaluations.
enum class ClIntegration { Exact, Rk4 };

/// One classical fourth-order step of dy/dt = flow(t, y).
template <typename Flow>
Vector rk4_step_generic(const Flow& flow, double t, const Vector& y,
                        double dt) {
  const Vector k1 = flow(t, y);
  const Vector k2 = flow(t + 0.5 * dt, Vector(y + (0.5 * dt) * k1));
  const Vector k3 = flow(t + 0.5 * dt, Vector(y + (0.5 * dt) * k2));
  const Vector k4 = flow(t + dt, Vector(y + dt * k3));
  return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Per-agent tuning and initial conditions.
struct AgentConfig {
  double q = 10.0;          // state cost weight
  Matrix r;                 // control cost
  double eta_c1 = 0.1;
  double eta_c2 = 10.0;
  double eta_a1 = 5.0;
  double eta_a2 = 0.1;
  double nu = 0.005;
  double beta = 0.5;
  double gamma_bar = 1e4;
  double observer_gain = 500.0;  // k_i
  double cl_gain = 30.0;         // k_theta
  double drift_gain = 1.0;       // adaptation gain (scalar times identity)
  int stack_capacity = 30;
  // Prior bounds on the drift weights and reconstruction error; analysis
  // metadata only, echoed in reports and never consumed by the updates.
  double theta_bound = 0.0;
  double eps_bound = 0.0;
  Vector w_c0, w_a0;
  double gamma0 = 500.0;  // initial least-squares gain (times identity)
  Matrix theta0;          // initial drift weights, (P+1) x n
  Vector x_init;
  Vector xhat_init;
};

/// Extrapolation-grid specification: a Cartesian product of own-error
/// values, own-state values, and one value set per extended neighbor
/// error. Randomized mode draws the same number of points uniformly from
/// the axis ranges using the run seed.
struct GridSpec {
  std::vector<double> own_error_values{-1.0, -0.5, 0.0, 0.5, 1.0};
  std::vector<double> own_state_values{0.0, 1.0, 2.0};
  std::vector<double> neighbor_error_values{-0.5, 0.0, 0.5};
  bool randomized = false;
};

struct SimConfig {
  std::string scenario;
  /// Leader trajectory as a plotting-tool expression in t; empty when
  /// unavailable. Only used by the generated figure scripts.
  std::string leader_formula;
  double dt = 1e-3;
  double t_final = 40.0;
  int decimate = 10;
  unsigned long seed = 0;
  int sg_window = 9;
  double rank_gate = 0.01;
  bool exact_model = false;
  ClIntegration cl_integration = ClIntegration::Exact;

  Matrix adjacency;
  Vector pinning;
  bool normalize_weights = false;
  std::vector<Vector> offsets;

  ModelSet models;
  std::vector<Matrix> theta_true;  // drift weights in basis coordinates
  std::vector<DriftBasis> drift_bases;
  std::vector<PolyBasis> value_bases;
  std::vector<AgentConfig> agents;
  GridSpec grid;

  int n_agents() const { return static_cast<int>(agents.size()); }
  /// Throws std::invalid_argument describing the first violated invariant.
  void validate() const;
};

ExtrapolationGrid build_extrapolation_grid(const GridSpec& spec,
                                           const SubgraphIndex& idx,
                                           int state_dim,
                                           unsigned long seed);

/// Assemble the immutable game description from a run configuration.
std::unique_ptr<GameSystem> build_system(const SimConfig& cfg);

/// Uniformly decimated record of a run. Weight histories are stored per
/// agent because the weight counts differ.
struct TraceLog {
  int n_agents = 0;
  std::vector<double> t;
  Matrix x, e, u, mu, delta;  // rows = samples; x and e expand per state
  std::vector<Matrix> w_c, w_a, theta;   // per agent, rows = samples
  bool aborted = false;
  std::string abort_reason;

  // Run diagnostics.
  std::vector<double> rho_lower;    // extrapolation richness per agent
  std::vector<double> sigma_lower;  // final stack rank metric per agent
  std::vector<double> sg_error_max; // worst smoothed-derivative error seen
  std::vector<double> gamma_norm_max;
  std::vector<double> gamma_norm_cap;  // max(||gamma0||, gamma_bar)
  double wall_seconds = 0.0;

  int rows() const { return static_cast<int>(t.size()); }
};

/// Signals computed alongside one flow evaluation, used for logging and
/// the discrete sample feeds.
struct FlowDiagnostics {
  std::vector<Vector> u;       // applied control per agent
  std::vector<Vector> mu_hat;  // policy output per agent
  std::vector<Vector> e;       // tracking errors
  std::vector<double> delta;   // on-trajectory Bellman errors
};

/// Couples the plants, observers, identifiers, critics, and actors of
/// all agents into one deterministic fixed-step simulation.
class Simulator {
 public:
  explicit Simulator(SimConfig cfg);

  const GameSystem& system() const { return *sys_; }
  const SimConfig& config() const { return cfg_; }

  Vector leader_state(double t) const;
  const ExtrapolationGrid& grid(int agent) const { return grids_[agent]; }
  const HistoryStack& stack(int agent) const { return stacks_[agent]; }

  Vector initial_state() const;

  /// Time derivative of the packed continuous state. Stage-consistent:
  /// every term is evaluated at (t, y); recorded stacks and filter
  /// windows are frozen.
  Vector network_flow(double t, const Vector& y,
                      FlowDiagnostics* diag = nullptr) const;

  /// Classical fourth-order step of the continuous state. Discrete side
  /// effects are not applied here.
  Vector rk4_step(double t, const Vector& y) const;
  /// Variant reusing an already evaluated first stage.
  Vector rk4_step(double t, const Vector& y, const Vector& k1) const;

  TraceLog run();

  /// Grid samples from the most recent flow evaluation (after run(),
  /// the evaluation at the final time).
  std::span<const GridSample> last_grid_samples(int agent) const {
    return grid_samples_[agent];
  }

  /// Worst residual of the steady-state relative-control identity along
  /// the desired trajectory; large values flag formations the plant
  /// family cannot hold exactly.
  double steady_state_residual(int samples = 50) const;

  // Packed-state accessors (agent-major layout), exposed for tests.
  Vector agent_x(const Vector& y, int i) const;
  Vector agent_xhat(const Vector& y, int i) const;
  Matrix agent_theta(const Vector& y, int i) const;
  Vector agent_wc(const Vector& y, int i) const;
  Vector agent_wa(const Vector& y, int i) const;
  Matrix agent_gamma(const Vector& y, int i) const;

 private:
  struct Layout {
    int x = 0, xhat = 0, theta = 0, wc = 0, wa = 0, gamma = 0;
    int L = 0, p1 = 0;
  };
  struct GridPointEval {
    std::unique_ptr<GameEval> eval;
    Vector omega;
    double rho = 1.0;
    double delta = 0.0;
  };

  void unpack_weights(const Vector& y, NetworkWeights& w) const;
  CriticState critic_view(const Vector& y, int i) const;
  ActorState actor_view(const Vector& y, int i) const;
  void refresh_grid(int i, const NetworkWeights& w, const Vector& y,
                    std::vector<GridSample>& samples) const;
  bool cl_gate_open(int i) const;
  void apply_discrete_updates(double t_new, Vector& y);
  void push_sample(double t, const Vector& y, const FlowDiagnostics& diag);

  SimConfig cfg_;
  std::unique_ptr<GameSystem> sys_;
  std::vector<Layout> layout_;
  int state_size_ = 0;
  int leader_offset_ = -1;  // integrated leader block when no closed form
  std::vector<ExtrapolationGrid> grids_;
  mutable std::vector<std::vector<GridPointEval>> grid_eval_;
  mutable NetworkWeights weights_;
  mutable std::vector<std::vector<GridSample>> grid_samples_;
  mutable Vector rho_tmp_;

  // Discrete per-agent machinery.
  struct SampleWindow {
    std::deque<double> t;
    std::deque<Vector> x;
    std::deque<Vector> u;
  };
  std::vector<HistoryStack> stacks_;
  std::vector<SampleWindow> windows_;
  std::vector<double> sg_error_max_;
  Vector sg_weights_;
  std::vector<GridRankTracker> rank_trackers_;
};

/// Simulate and record a scenario end to end.
TraceLog run(const SimConfig& cfg);

}  // namespace graphgame
