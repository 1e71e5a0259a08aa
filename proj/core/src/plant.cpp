#include "graphgame/plant.hpp"

#include <cmath>

#include <Eigen/LU>
#include <Eigen/SVD>

namespace graphgame {

Matrix pseudo_inverse(const Matrix& m, double tol) {
  if (m.rows() < m.cols())
    throw RankDeficiencyError("matrix has more columns than rows");
  if (m.rows() == 1 && m.cols() == 1) {
    if (m(0, 0) == 0.0 || !std::isfinite(m(0, 0)))
      throw RankDeficiencyError("matrix is rank deficient");
    return Matrix::Constant(1, 1, 1.0 / m(0, 0));
  }
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(sv.size() - 1) <= tol * sv(0))
    throw RankDeficiencyError("matrix is rank deficient");
  // Normal equations; the matrices here are tiny and well conditioned.
  return (m.transpose() * m).ldlt().solve(m.transpose());
}

Vector neighborhood_error(int i, std::span<const Vector> states,
                          const Vector& leader_state,
                          const FormationSpec& formation,
                          const DirectedNetwork& net) {
  if (i < 0 || i >= net.size())
    throw std::out_of_range("agent index out of range");
  if (static_cast<int>(states.size()) != net.size())
    throw std::invalid_argument("neighbor state missing");
  const int n = static_cast<int>(leader_state.size());
  Vector e = Vector::Zero(n);
  const double a0 = net.pinning_gain(i);
  if (a0 > 0.0)
    e += a0 * ((states[i] - leader_state) - formation.relative(i, kLeader));
  for (int j : net.in_neighbors(i))
    e += net.edge_weight(i, j) *
         ((states[i] - states[j]) - formation.relative(i, j));
  return e;
}

Vector stacked_error(std::span<const Vector> states,
                     const Vector& leader_state,
                     const FormationSpec& formation,
                     const DirectedNetwork& net) {
  const int N = net.size();
  if (static_cast<int>(states.size()) != N)
    throw std::invalid_argument("neighbor state missing");
  const int n = static_cast<int>(leader_state.size());
  Matrix map = laplacian(net);
  map.diagonal() += net.pinning();
  // Deviations from the desired leader-relative positions.
  Matrix dev(N, n);
  for (int i = 0; i < N; ++i)
    dev.row(i) = (states[i] - formation.offset(i) - leader_state).transpose();
  const Matrix err = map * dev;
  Vector out(N * n);
  for (int i = 0; i < N; ++i) out.segment(i * n, n) = err.row(i).transpose();
  return out;
}

RelativeControlTerms relative_control_terms(int i, int j, const Vector& x_j,
                                            const FormationSpec& formation,
                                            const ModelSet& models) {
  const AgentModel& self = models.agents.at(i);
  const Vector shifted = x_j + formation.relative(i, j);
  const Matrix gp = pseudo_inverse(self.effectiveness(shifted));
  RelativeControlTerms out;
  if (j == kLeader) {
    out.f = gp * (models.leader.drift(x_j) - self.drift(shifted));
    out.g = Matrix::Zero(self.input_dim, 0);
  } else {
    const AgentModel& nbr = models.agents.at(j);
    out.f = gp * (nbr.drift(x_j) - self.drift(shifted));
    out.g = gp * nbr.effectiveness(x_j);
  }
  return out;
}

SubgraphPlant::SubgraphPlant(const DirectedNetwork& net,
                             const ModelSet& models,
                             const FormationSpec& formation,
                             SubgraphIndex idx)
    : net_(&net),
      models_(&models),
      formation_(&formation),
      idx_(std::move(idx)),
      n_(models.state_dim()) {
  const int s = idx_.size();
  m_.resize(s);
  moff_.resize(s);
  edges_.resize(s);
  leader_gain_.resize(s);
  gain_sum_.resize(s);
  for (int k = 0; k < s; ++k) {
    const int agent = idx_.ordering[k];
    m_[k] = models.agents.at(agent).input_dim;
    moff_[k] = msum_;
    msum_ += m_[k];
    leader_gain_[k] = net.pinning_gain(agent);
    gain_sum_[k] = net.neighbor_gain_sum(agent);
    for (int j : net.in_neighbors(agent)) {
      const int slot = idx_.slot_of(j);
      if (slot < 0)
        throw std::logic_error("subgraph nesting violated: neighbor outside");
      edges_[k].push_back({slot, net.edge_weight(agent, j)});
    }
  }
  // Restriction of (L + A0) to the members; invertible under the
  // spanning-tree assumption.
  Matrix restricted = Matrix::Zero(s, s);
  for (int k = 0; k < s; ++k) {
    restricted(k, k) = gain_sum_[k];
    for (const auto& [slot, a] : edges_[k]) restricted(k, slot) -= a;
  }
  Eigen::PartialPivLU<Matrix> lu(restricted);
  double scale = 1.0;
  for (int r = 0; r < s; ++r) scale *= restricted.row(r).norm();
  if (scale == 0.0 || std::abs(lu.determinant()) <= 1e-12 * scale)
    throw std::invalid_argument(
        "subgraph error map singular: no spanning tree into agent " +
        std::to_string(idx_.agent));
  error_map_inv_ = lu.inverse();
}

RecoveredStates SubgraphPlant::recover(const SubgraphState& state) const {
  const int s = idx_.size();
  if (state.errors.size() != static_cast<Eigen::Index>(s) * n_ ||
      state.own_state.size() != n_)
    throw std::invalid_argument("subgraph state has wrong dimensions");
  Matrix err(s, n_);
  for (int k = 0; k < s; ++k)
    err.row(k) = state.errors.segment(k * n_, n_).transpose();
  const Matrix dev = error_map_inv_ * err;  // leader-relative deviations
  RecoveredStates out;
  out.leader_state = state.own_state - formation_->offset(idx_.agent) -
                     dev.row(0).transpose();
  out.states.resize(s);
  out.states[0] = state.own_state;
  for (int k = 1; k < s; ++k)
    out.states[k] = dev.row(k).transpose() +
                    formation_->offset(idx_.ordering[k]) + out.leader_state;
  return out;
}

SubgraphGeometry SubgraphPlant::geometry(std::span<const Vector> member_states,
                                         const Vector& leader_state) const {
  const int s = idx_.size();
  if (static_cast<int>(member_states.size()) != s)
    throw std::invalid_argument("member state count mismatch");
  SubgraphGeometry geo;
  geo.plant = this;
  geo.states.assign(member_states.begin(), member_states.end());
  geo.leader_state = leader_state;
  geo.g.resize(s);
  geo.f.resize(s);
  geo.drift_terms.resize(s);
  geo.f_leader = models_->leader.drift(leader_state);

  for (int k = 0; k < s; ++k) {
    const int agent = idx_.ordering[k];
    const AgentModel& model = models_->agents.at(agent);
    geo.g[k] = model.effectiveness(member_states[k]);
    geo.f[k] = model.drift(member_states[k]);
  }

  geo.block_gain = Matrix::Zero(msum_, msum_);
  for (int k = 0; k < s; ++k) {
    const int agent = idx_.ordering[k];
    const AgentModel& model = models_->agents.at(agent);
    geo.block_gain.block(moff_[k], moff_[k], m_[k], m_[k]) =
        gain_sum_[k] * Matrix::Identity(m_[k], m_[k]);

    auto add_term = [&](int nbr_slot, int nbr_agent, double a,
                        const Vector& x_nbr) {
      SubgraphGeometry::DriftTerm term;
      term.nbr_slot = nbr_slot;
      term.weight = a;
      term.eval_self = x_nbr + formation_->relative(agent, nbr_agent);
      term.eval_nbr = x_nbr;
      Matrix gp;
      try {
        gp = pseudo_inverse(model.effectiveness(term.eval_self));
      } catch (const RankDeficiencyError&) {
        throw RankDeficiencyError(
            "effectiveness of agent " + std::to_string(agent) +
            " rank deficient at a relative-control evaluation point");
      }
      term.coef = a * gp;
      if (nbr_slot >= 0) {
        geo.block_gain.block(moff_[k], moff_[nbr_slot], m_[k], m_[nbr_slot]) -=
            a * gp * geo.g[nbr_slot];
      }
      geo.drift_terms[k].push_back(std::move(term));
    };

    if (leader_gain_[k] > 0.0)
      add_term(-1, kLeader, leader_gain_[k], leader_state);
    for (const auto& [slot, a] : edges_[k])
      add_term(slot, idx_.ordering[slot], a, member_states[slot]);
  }

  Eigen::PartialPivLU<Matrix> lu(geo.block_gain);
  double scale = 1.0;
  for (int r = 0; r < msum_; ++r) scale *= geo.block_gain.row(r).norm();
  if (scale == 0.0 || std::abs(lu.determinant()) <= 1e-12 * scale)
    throw SingularCouplingError("control coupling matrix singular for agent " +
                                std::to_string(idx_.agent));
  geo.block_gain_inv = lu.inverse();

  // Owner flow input maps. The same matrices multiply both the control
  // errors and the relative drift stack.
  const Matrix own_rows = geo.block_gain_inv.middleRows(moff_[0], m_[0]);
  geo.input_map_state = geo.g[0] * own_rows;
  geo.input_map_error = gain_sum_[0] * geo.input_map_state;
  for (const auto& [slot, a] : edges_[0]) {
    geo.input_map_error -=
        a * geo.g[slot] * geo.block_gain_inv.middleRows(moff_[slot], m_[slot]);
  }
  return geo;
}

Vector SubgraphGeometry::relative_drift_stack() const {
  const SubgraphPlant& p = *plant;
  Vector stack = Vector::Zero(p.input_dim_sum());
  for (int k = 0; k < p.members(); ++k) {
    auto block = stack.segment(p.block_offset(k), p.block_dim(k));
    for (const DriftTerm& t : drift_terms[k]) {
      const Vector& f_nbr = t.nbr_slot < 0 ? f_leader : f[t.nbr_slot];
      const int agent = p.member_agent(k);
      block += t.coef * (f_nbr - p.models().agents[agent].drift(t.eval_self));
    }
  }
  return stack;
}

Vector SubgraphGeometry::relative_drift_stack_est(const DriftEval& fhat) const {
  const SubgraphPlant& p = *plant;
  Vector stack = Vector::Zero(p.input_dim_sum());
  for (int k = 0; k < p.members(); ++k) {
    auto block = stack.segment(p.block_offset(k), p.block_dim(k));
    const int agent = p.member_agent(k);
    for (const DriftTerm& t : drift_terms[k]) {
      const Vector f_nbr = t.nbr_slot < 0
                               ? f_leader
                               : fhat(p.member_agent(t.nbr_slot), t.eval_nbr);
      block += t.coef * (f_nbr - fhat(agent, t.eval_self));
    }
  }
  return stack;
}

Vector SubgraphGeometry::fdiff_true() const {
  const SubgraphPlant& p = *plant;
  Vector out = Vector::Zero(p.state_dim());
  const double a0 = p.member_leader_gain(0);
  if (a0 > 0.0) out += a0 * (f[0] - f_leader);
  for (const auto& [slot, a] : p.member_edges(0)) out += a * (f[0] - f[slot]);
  return out;
}

Vector SubgraphGeometry::fdiff_est(const DriftEval& fhat) const {
  const SubgraphPlant& p = *plant;
  Vector out = Vector::Zero(p.state_dim());
  const Vector f_own = fhat(p.member_agent(0), states[0]);
  const double a0 = p.member_leader_gain(0);
  if (a0 > 0.0) out += a0 * (f_own - f_leader);
  for (const auto& [slot, a] : p.member_edges(0))
    out += a * (f_own - fhat(p.member_agent(slot), states[slot]));
  return out;
}

Vector SubgraphGeometry::error_drift(const Vector& drift_stack) const {
  return fdiff_true() + input_map_error * drift_stack;
}

Vector SubgraphGeometry::state_drift(const Vector& drift_stack) const {
  return f[0] + input_map_state * drift_stack;
}

Vector SubgraphGeometry::error_drift_est(const DriftEval& fhat,
                                         const Vector& drift_stack) const {
  return fdiff_est(fhat) + input_map_error * drift_stack;
}

Vector SubgraphGeometry::state_drift_est(const DriftEval& fhat,
                                         const Vector& drift_stack) const {
  return fhat(plant->member_agent(0), states[0]) +
         input_map_state * drift_stack;
}

Vector SubgraphGeometry::controls_from_mu(const Vector& mu_stack,
                                          const Vector& drift_stack) const {
  return block_gain_inv * (mu_stack + drift_stack);
}

Vector SubgraphGeometry::mu_from_controls(const Vector& u_stack,
                                          const Vector& drift_stack) const {
  return block_gain * u_stack - drift_stack;
}

Vector SubgraphGeometry::own_control(const Vector& mu_stack,
                                     const Vector& drift_stack) const {
  const SubgraphPlant& p = *plant;
  return block_gain_inv.middleRows(p.block_offset(0), p.block_dim(0)) *
         (mu_stack + drift_stack);
}

Vector SubgraphGeometry::error_flow(const Vector& mu_stack) const {
  return error_drift(relative_drift_stack()) + input_map_error * mu_stack;
}

Vector SubgraphGeometry::state_flow(const Vector& mu_stack) const {
  return state_drift(relative_drift_stack()) + input_map_state * mu_stack;
}

Matrix SubgraphGeometry::error_input_column(int agent) const {
  const SubgraphPlant& p = *plant;
  const int slot = p.index().slot_of(agent);
  const int m = p.models().agents.at(agent).input_dim;
  if (slot < 0) return Matrix::Zero(p.state_dim(), m);
  return input_map_error.middleCols(p.block_offset(slot), p.block_dim(slot));
}

Matrix SubgraphGeometry::state_input_own_column() const {
  const SubgraphPlant& p = *plant;
  return input_map_state.middleCols(p.block_offset(0), p.block_dim(0));
}

}  // namespace graphgame
