#pragma once

#include <span>
#include <vector>

#include "graphgame/system.hpp"

namespace graphgame {

/// Value-weight estimate with its least-squares gain and tuning.
struct CriticState {
  Vector weights;              // L
  Matrix gain;                 // SPD, L x L
  double gain_bound = 1e4;     // saturation on ||gain||_F
  double normalization = 0.0;  // nu
  double rate_state = 0.0;     // eta_c1
  double rate_grid = 0.0;      // eta_c2
  double forgetting = 0.0;     // beta
};

/// Policy-weight estimate with its tuning.
struct ActorState {
  Vector weights;               // L
  double rate_consensus = 0.0;  // eta_a1
  double rate_decay = 0.0;      // eta_a2
};

/// Fixed evaluation points used to extrapolate the Bellman error.
struct ExtrapolationGrid {
  std::vector<Vector> points;  // subgraph coordinate vectors
  int count() const { return static_cast<int>(points.size()); }
};

/// Per-agent weight estimates shared across an evaluation.
struct NetworkWeights {
  std::vector<Matrix> theta;  // drift weights
  std::vector<Vector> w_c;    // value weights
  std::vector<Vector> w_a;    // policy weights
};

/// Evaluation of a networked game at one tuple of states, or of a single
/// agent's subgraph at a synthetic coordinate point (member states
/// reconstructed through the error-map solve). Geometry, basis values,
/// and policy input maps are computed once at construction; the
/// weight-dependent quantities are cheap re-evaluations.
class GameEval {
 public:
  /// Whole-network evaluation at actual states.
  GameEval(const GameSystem& sys, std::span<const Vector> states,
           const Vector& leader_state);

  /// Single-subgraph evaluation at a coordinate point of `agent`.
  GameEval(const GameSystem& sys, int agent, const Vector& point);

  const GameSystem& system() const { return *sys_; }
  bool has(int agent) const { return data_[agent].present; }

  const Vector& error(int agent) const { return at(agent).error; }
  const Vector& coords(int agent) const { return at(agent).coords; }
  const SubgraphGeometry& geometry(int agent) const { return at(agent).geom; }

  /// Policy input map: the gradient-weighted stack of flow input columns
  /// that the feedback policies contract against (m_i x L_i).
  const Matrix& g_sigma(int agent) const { return at(agent).g_sigma; }

  /// (g_sigma)^T R^{-1} g_sigma, used by the actor update.
  const Matrix& policy_quadratic(int agent) const { return at(agent).quad; }

  double own_cost(int agent) const { return at(agent).cost_value; }

  /// mu_hat = -1/2 R^{-1} g_sigma w_a.
  Vector policy(int agent, const NetworkWeights& w) const;

  double value(int agent, const NetworkWeights& w) const;

  /// Regressor omega and approximate Bellman error using the identified
  /// drift. Scratch-free: writes into the supplied vector.
  void bellman(int agent, const NetworkWeights& w, Vector& omega,
               double& delta) const;

  /// Same contraction with the true drift substituted.
  void bellman_exact(int agent, const NetworkWeights& w, Vector& omega,
                     double& delta) const;

  /// Regressor and its normalizer in one call.
  std::pair<Vector, double> regressor(int agent, const NetworkWeights& w,
                                      const CriticState& critic) const;

  /// Implementable control of `agent` from its own subgraph: inverts the
  /// coupling matrix against the policy stack plus the estimated
  /// relative-drift stack.
  Vector control(int agent, const NetworkWeights& w) const;

  /// Realized control error of `agent` given every member's applied
  /// input (true-model diagnostic).
  Vector realized_mu(int agent, std::span<const Vector> controls) const;

 private:
  struct MemberData {
    bool present = false;
    int agent = -1;
    Vector error;        // e_j
    Vector coords;       // subgraph coordinates of j
    SubgraphGeometry geom;
    Matrix grad;         // value-basis Jacobian at coords, L_j x dim
    Matrix g_sigma;      // m_j x L_j
    Matrix quad;         // g_sigma^T R^{-1} g_sigma
    double cost_value = 0.0;  // Q_j(e_j)
    Vector sigma_drift;  // drift basis at own state
    Vector drift_stack_true;  // cached F_j
    Vector fdiff_true;        // cached weighted own-vs-neighbor drift gap
    // drift-basis values aligned with geom.drift_terms: (self, nbr)
    std::vector<std::vector<std::pair<Vector, Vector>>> term_basis;
  };

  struct Scratch {
    std::vector<Vector> mu;     // policy per member
    std::vector<Vector> fhat;   // estimated drift at member states
    std::vector<Vector> stack;  // combined policy + drift stacks per member
    std::vector<Vector> drift;  // estimated relative-drift stacks per member
    Vector flow;                // state-dim temp
    Vector tmp_m;               // input-dim temp
  };

  void build(const std::vector<const Vector*>& states_by_agent,
             const Vector& leader_state, const std::vector<int>& members);
  const MemberData& at(int agent) const;
  void assemble(int agent, const NetworkWeights& w, bool exact, Vector& omega,
                double& delta) const;
  void member_policies(const NetworkWeights& w) const;
  void estimated_drift_stack(const MemberData& md, const NetworkWeights& w,
                             Vector& out) const;

  const GameSystem* sys_;
  std::vector<MemberData> data_;   // indexed by agent id
  std::vector<int> members_;       // agents present, evaluation order
  mutable Scratch ws_;
};

/// rho = 1 + nu omega^T Gamma omega.
double regressor_normalizer(const Vector& omega, const CriticState& critic);

/// One extrapolation-point evaluation consumed by the update laws.
struct GridSample {
  const Vector* omega = nullptr;
  const Matrix* quad = nullptr;  // (g_sigma^k)^T R^{-1} g_sigma^k
  double rho = 1.0;
  double delta = 0.0;
};

struct CriticFlow {
  Vector weights_dot;
  Matrix gain_dot;
};

/// Least-squares critic update driven by the on-trajectory Bellman error
/// and the extrapolated errors; the gain follows a saturated Riccati-type
/// law with forgetting.
CriticFlow critic_flow(const CriticState& critic, const Vector& omega_t,
                       double rho_t, double delta_t,
                       std::span<const GridSample> grid);

/// Gradient-plus-consensus actor update.
Vector actor_flow(const ActorState& actor, const CriticState& critic,
                  const Matrix& quad_t, const Vector& omega_t, double rho_t,
                  std::span<const GridSample> grid);

/// Running lower estimate of the extrapolation richness:
/// min over sampled times of lambda_min(sum_k omega^k omega^k^T / rho^k)/M.
class GridRankTracker {
 public:
  void add_sample(std::span<const GridSample> grid);
  double value() const { return samples_ == 0 ? 0.0 : min_; }
  long samples() const { return samples_; }

 private:
  double min_ = 0.0;
  long samples_ = 0;
};

}  // namespace graphgame
