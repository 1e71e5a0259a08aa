#pragma once

#include <functional>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "graphgame/graph.hpp"
#include "graphgame/types.hpp"

namespace graphgame {

/// Control-affine agent dynamics xdot = f(x) + g(x) u.
struct AgentModel {
  int state_dim = 1;
  int input_dim = 1;
  std::function<Vector(const Vector&)> drift;          // f_i
  std::function<Matrix(const Vector&)> effectiveness;  // g_i, n x m_i
};

/// Leader dynamics. When `trajectory` is set the simulator uses the closed
/// form; otherwise it integrates `drift` from `initial_state`.
struct LeaderModel {
  int state_dim = 1;
  std::function<Vector(const Vector&)> drift;     // f_0
  std::function<Vector(double)> trajectory;       // x_0(t), optional
  Vector initial_state;
  double bound = std::numeric_limits<double>::infinity();
};

/// Desired leader-relative positions x_di0 for each agent.
struct FormationSpec {
  std::vector<Vector> offsets;

  const Vector& offset(int i) const { return offsets.at(i); }

  /// x_dij = x_di0 - x_dj0; the leader offset is x_di0 itself.
  Vector relative(int i, int j) const {
    if (j == kLeader) return offsets.at(i);
    return offsets.at(i) - offsets.at(j);
  }
};

struct ModelSet {
  std::vector<AgentModel> agents;
  LeaderModel leader;

  int size() const { return static_cast<int>(agents.size()); }
  int state_dim() const { return leader.state_dim; }
};

/// Stacked member errors of one subgraph together with the owner state;
/// the concatenation is the coordinate vector the value functions see.
struct SubgraphState {
  Vector errors;     // n * s_i, member order
  Vector own_state;  // n

  Vector concat() const {
    Vector out(errors.size() + own_state.size());
    out << errors, own_state;
    return out;
  }

  static SubgraphState split(const Vector& concat, int state_dim) {
    SubgraphState s;
    s.errors = concat.head(concat.size() - state_dim);
    s.own_state = concat.tail(state_dim);
    return s;
  }
};

/// Member states reconstructed from a subgraph coordinate vector; the
/// leader state is the one implied by the owner's own coordinates.
struct RecoveredStates {
  std::vector<Vector> states;  // member order
  Vector leader_state;
};

/// Moore-Penrose left inverse (M^T M)^{-1} M^T for full-column-rank M.
/// Throws RankDeficiencyError when the smallest singular value falls
/// below tol times the largest.
Matrix pseudo_inverse(const Matrix& m, double tol = 1e-10);

/// Local neighborhood tracking error of agent i.
Vector neighborhood_error(int i, std::span<const Vector> states,
                          const Vector& leader_state,
                          const FormationSpec& formation,
                          const DirectedNetwork& net);

/// All tracking errors at once through the (L + A0) x I_n map. Agrees
/// with per-agent concatenation of neighborhood_error.
Vector stacked_error(std::span<const Vector> states,
                     const Vector& leader_state,
                     const FormationSpec& formation,
                     const DirectedNetwork& net);

/// Relative steady-state control decomposition u_ij = f_ij + g_ij u_j.
struct RelativeControlTerms {
  Vector f;  // m_i
  Matrix g;  // m_i x m_j (m_i x 0 for the leader)
};

/// Terms of the relative steady-state control of agent i with respect to
/// j (kLeader allowed). Evaluated at the neighbor state x_j.
RelativeControlTerms relative_control_terms(int i, int j, const Vector& x_j,
                                            const FormationSpec& formation,
                                            const ModelSet& models);

class SubgraphPlant;

/// Everything state-dependent the subgraph control transforms need,
/// evaluated at one tuple of member states. Built by SubgraphPlant;
/// reusable across weight evaluations at the same point.
struct SubgraphGeometry {
  /// One weighted relative-drift term a_cl * g_c^+(x_l + x_dcl)(f_l - f_c).
  struct DriftTerm {
    int nbr_slot = -1;  // -1: leader
    double weight = 0.0;
    Matrix coef;       // a_cl * g_c^+(x_l + x_dcl), m_c x n
    Vector eval_self;  // x_l + x_dcl
    Vector eval_nbr;   // x_l (leader state for the leader term)
  };

  const SubgraphPlant* plant = nullptr;
  std::vector<Vector> states;
  Vector leader_state;

  Matrix block_gain;      // coupling matrix over the member inputs
  Matrix block_gain_inv;
  std::vector<std::vector<DriftTerm>> drift_terms;  // per member slot
  std::vector<Matrix> g;      // g_c(x_c) per slot
  std::vector<Vector> f;      // f_c(x_c) per slot
  Vector f_leader;            // f_0(x0)
  Matrix input_map_error;     // owner error-flow input map (n x msum)
  Matrix input_map_state;     // owner state-flow input map (n x msum)

  /// Drift evaluator used by the identifier-backed assemblies.
  using DriftEval = std::function<Vector(int agent, const Vector& x)>;

  Vector relative_drift_stack() const;                       // F_i
  Vector relative_drift_stack_est(const DriftEval& fhat) const;

  /// Autonomous parts of the owner's error/state flow given the stack.
  Vector error_drift(const Vector& drift_stack) const;
  Vector state_drift(const Vector& drift_stack) const;
  Vector error_drift_est(const DriftEval& fhat,
                         const Vector& drift_stack) const;
  Vector state_drift_est(const DriftEval& fhat,
                         const Vector& drift_stack) const;

  Vector controls_from_mu(const Vector& mu_stack,
                          const Vector& drift_stack) const;
  Vector mu_from_controls(const Vector& u_stack,
                          const Vector& drift_stack) const;
  Vector own_control(const Vector& mu_stack, const Vector& drift_stack) const;

  Vector error_flow(const Vector& mu_stack) const;
  Vector state_flow(const Vector& mu_stack) const;

  /// Block column of the error-flow input map owned by `agent`, or a zero
  /// column when the agent is not a member.
  Matrix error_input_column(int agent) const;
  /// Block column of the state-flow input map at the owner slot.
  Matrix state_input_own_column() const;

 private:
  friend class SubgraphPlant;
  Vector fdiff_true() const;
  Vector fdiff_est(const DriftEval& fhat) const;
};

/// Per-agent factory for subgraph geometry, block layout, and the
/// error-to-state recovery solve. Immutable after construction.
class SubgraphPlant {
 public:
  SubgraphPlant(const DirectedNetwork& net, const ModelSet& models,
                const FormationSpec& formation, SubgraphIndex idx);

  const SubgraphIndex& index() const { return idx_; }
  int members() const { return idx_.size(); }
  int member_agent(int slot) const { return idx_.ordering[slot]; }
  int state_dim() const { return n_; }
  int input_dim_sum() const { return msum_; }
  int block_offset(int slot) const { return moff_[slot]; }
  int block_dim(int slot) const { return m_[slot]; }

  /// In-network edges of the member at `slot` as (neighbor slot, weight),
  /// plus the leader gain; used by flow assemblies.
  const std::vector<std::pair<int, double>>& member_edges(int slot) const {
    return edges_[slot];
  }
  double member_leader_gain(int slot) const { return leader_gain_[slot]; }
  double member_gain_sum(int slot) const { return gain_sum_[slot]; }

  /// Reconstruct member states (and the implied leader state) from the
  /// subgraph coordinates, solving the restricted error map.
  RecoveredStates recover(const SubgraphState& state) const;

  SubgraphGeometry geometry(std::span<const Vector> member_states,
                            const Vector& leader_state) const;

  const DirectedNetwork& network() const { return *net_; }
  const ModelSet& models() const { return *models_; }
  const FormationSpec& formation() const { return *formation_; }

 private:
  const DirectedNetwork* net_;
  const ModelSet* models_;
  const FormationSpec* formation_;
  SubgraphIndex idx_;
  int n_ = 0;
  std::vector<int> m_, moff_;
  int msum_ = 0;
  std::vector<std::vector<std::pair<int, double>>> edges_;
  std::vector<double> leader_gain_;
  std::vector<double> gain_sum_;
  Matrix error_map_inv_;  // inverse of the restricted (L + A0)
};

}  // namespace graphgame
