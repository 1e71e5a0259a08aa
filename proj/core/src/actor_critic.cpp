#include "graphgame/actor_critic.hpp"

#include <Eigen/Eigenvalues>

namespace graphgame {

GameEval::GameEval(const GameSystem& sys, std::span<const Vector> states,
                   const Vector& leader_state)
    : sys_(&sys) {
  const int N = sys.agents();
  if (static_cast<int>(states.size()) != N)
    throw std::invalid_argument("state count does not match network size");
  std::vector<const Vector*> by_agent(N);
  std::vector<int> members(N);
  for (int a = 0; a < N; ++a) {
    by_agent[a] = &states[a];
    members[a] = a;
  }
  data_.resize(N);
  for (int a = 0; a < N; ++a)
    data_[a].error =
        neighborhood_error(a, states, leader_state, sys.formation, sys.net);
  build(by_agent, leader_state, members);
}

GameEval::GameEval(const GameSystem& sys, int agent, const Vector& point)
    : sys_(&sys) {
  const int N = sys.agents();
  const int n = sys.state_dim();
  const SubgraphIndex& idx = sys.subgraph(agent);
  if (point.size() != static_cast<Eigen::Index>(n) * (idx.size() + 1))
    throw std::invalid_argument("coordinate point has wrong dimension");
  const SubgraphState ss = SubgraphState::split(point, n);
  const RecoveredStates rec = sys.plant(agent).recover(ss);

  data_.resize(N);
  std::vector<const Vector*> by_agent(N, nullptr);
  for (int k = 0; k < idx.size(); ++k) {
    const int a = idx.ordering[k];
    by_agent[a] = &rec.states[k];
    data_[a].error = ss.errors.segment(k * n, n);
  }
  build(by_agent, rec.leader_state, idx.ordering);
}

void GameEval::build(const std::vector<const Vector*>& states_by_agent,
                     const Vector& leader_state,
                     const std::vector<int>& members) {
  members_ = members;
  const int n = sys_->state_dim();
  ws_.mu.resize(sys_->agents());
  ws_.fhat.resize(sys_->agents());
  ws_.stack.resize(sys_->agents());
  ws_.drift.resize(sys_->agents());
  ws_.flow.resize(n);

  for (int a : members_) {
    MemberData& md = data_[a];
    md.present = true;
    md.agent = a;
    const SubgraphIndex& idx = sys_->subgraph(a);
    const SubgraphPlant& plant = sys_->plant(a);

    std::vector<Vector> member_states(idx.size());
    for (int k = 0; k < idx.size(); ++k) {
      const Vector* s = states_by_agent[idx.ordering[k]];
      if (s == nullptr) throw std::logic_error("member state missing");
      member_states[k] = *s;
    }
    md.geom = plant.geometry(member_states, leader_state);

    md.coords.resize(n * (idx.size() + 1));
    for (int k = 0; k < idx.size(); ++k)
      md.coords.segment(k * n, n) = data_[idx.ordering[k]].error;
    md.coords.tail(n) = member_states[0];

    md.grad = sys_->value_bases[a].gradient(md.coords);
    md.sigma_drift = sys_->drift_bases[a].eval(member_states[0]);
    md.cost_value = sys_->costs[a].state_cost(md.error);
    md.drift_stack_true = md.geom.relative_drift_stack();
    md.fdiff_true =
        md.geom.error_drift(Vector::Zero(plant.input_dim_sum()));

    md.term_basis.resize(idx.size());
    for (int k = 0; k < idx.size(); ++k) {
      const int member = idx.ordering[k];
      for (const auto& term : md.geom.drift_terms[k]) {
        Vector sigma_self = sys_->drift_bases[member].eval(term.eval_self);
        Vector sigma_nbr;
        if (term.nbr_slot >= 0) {
          const int nbr = idx.ordering[term.nbr_slot];
          sigma_nbr = sys_->drift_bases[nbr].eval(term.eval_nbr);
        }
        md.term_basis[k].emplace_back(std::move(sigma_self),
                                      std::move(sigma_nbr));
      }
    }
    ws_.mu[a].resize(plant.block_dim(0));
    ws_.fhat[a].resize(n);
    ws_.stack[a].resize(plant.input_dim_sum());
    ws_.drift[a].resize(plant.input_dim_sum());
    if (ws_.tmp_m.size() < plant.input_dim_sum())
      ws_.tmp_m.resize(plant.input_dim_sum());
  }

  // Policy input maps need every member's geometry, so a second pass.
  for (int a : members_) {
    MemberData& md = data_[a];
    const SubgraphIndex& idx = sys_->subgraph(a);
    const int m = sys_->models.agents[a].input_dim;
    const int L = sys_->value_bases[a].size();
    md.g_sigma = Matrix::Zero(m, L);
    for (int k = 0; k < idx.size(); ++k) {
      const int l = idx.ordering[k];
      const int slot_in_l = sys_->subgraph(l).slot_of(a);
      if (slot_in_l < 0) continue;  // a does not influence l's stack
      const SubgraphPlant& pl = sys_->plant(l);
      md.g_sigma += data_[l]
                        .geom.input_map_error
                        .middleCols(pl.block_offset(slot_in_l), m)
                        .transpose() *
                    md.grad.middleCols(k * n, n).transpose();
    }
    md.g_sigma += md.geom.state_input_own_column().transpose() *
                  md.grad.rightCols(n).transpose();
    md.quad = md.g_sigma.transpose() * sys_->costs[a].control_cost_inv *
              md.g_sigma;
  }
}

const GameEval::MemberData& GameEval::at(int agent) const {
  const MemberData& md = data_.at(agent);
  if (!md.present)
    throw std::out_of_range("agent not part of this evaluation");
  return md;
}

Vector GameEval::policy(int agent, const NetworkWeights& w) const {
  const MemberData& md = at(agent);
  return -0.5 * sys_->costs[agent].control_cost_inv *
         (md.g_sigma * w.w_a[agent]);
}

double GameEval::value(int agent, const NetworkWeights& w) const {
  return w.w_c[agent].dot(sys_->value_bases[agent].eval(at(agent).coords));
}

void GameEval::member_policies(const NetworkWeights& w) const {
  for (int a : members_) {
    const MemberData& md = data_[a];
    auto tmp = ws_.tmp_m.head(ws_.mu[a].size());
    tmp.noalias() = md.g_sigma * w.w_a[a];
    ws_.mu[a].noalias() = sys_->costs[a].control_cost_inv * tmp;
    ws_.mu[a] *= -0.5;
  }
}

void GameEval::estimated_drift_stack(const MemberData& md,
                                     const NetworkWeights& w,
                                     Vector& out) const {
  const SubgraphPlant& plant = *md.geom.plant;
  const SubgraphIndex& idx = plant.index();
  out.setZero();
  for (int k = 0; k < idx.size(); ++k) {
    auto block = out.segment(plant.block_offset(k), plant.block_dim(k));
    const int member = idx.ordering[k];
    const auto& terms = md.geom.drift_terms[k];
    for (size_t t = 0; t < terms.size(); ++t) {
      const auto& [sigma_self, sigma_nbr] = md.term_basis[k][t];
      if (terms[t].nbr_slot < 0) {
        ws_.flow = md.geom.f_leader;
      } else {
        const int nbr = idx.ordering[terms[t].nbr_slot];
        ws_.flow.noalias() = w.theta[nbr].transpose() * sigma_nbr;
      }
      ws_.flow.noalias() -= w.theta[member].transpose() * sigma_self;
      block.noalias() += terms[t].coef * ws_.flow;
    }
  }
}

void GameEval::assemble(int agent, const NetworkWeights& w, bool exact,
                        Vector& omega, double& delta) const {
  const MemberData& own = at(agent);
  const SubgraphIndex& idx = sys_->subgraph(agent);
  const int n = sys_->state_dim();

  member_policies(w);
  if (!exact)
    for (int a : members_)
      ws_.fhat[a].noalias() = w.theta[a].transpose() *
                              data_[a].sigma_drift;

  omega.setZero();
  for (int j = 0; j < idx.size(); ++j) {
    const int l = idx.ordering[j];
    const MemberData& mdl = data_[l];
    const SubgraphPlant& pl = sys_->plant(l);
    const SubgraphIndex& idx_l = pl.index();

    // Stack the member policies, then add the relative drift stack.
    Vector& stack = ws_.stack[l];
    for (int k = 0; k < idx_l.size(); ++k)
      stack.segment(pl.block_offset(k), pl.block_dim(k)) =
          ws_.mu[idx_l.ordering[k]];
    if (exact) {
      stack += mdl.drift_stack_true;
      ws_.flow = mdl.fdiff_true;
    } else {
      estimated_drift_stack(mdl, w, ws_.drift[l]);
      stack += ws_.drift[l];
      // Weighted own-vs-neighbor gap of the estimated drift.
      ws_.flow.setZero();
      const double a0 = pl.member_leader_gain(0);
      if (a0 > 0.0) ws_.flow += a0 * (ws_.fhat[l] - mdl.geom.f_leader);
      for (const auto& [slot, a] : pl.member_edges(0))
        ws_.flow += a * (ws_.fhat[l] - ws_.fhat[idx_l.ordering[slot]]);
    }
    ws_.flow.noalias() += mdl.geom.input_map_error * stack;
    omega.noalias() += own.grad.middleCols(j * n, n) * ws_.flow;
  }

  // Own-state contribution.
  {
    const SubgraphPlant& plant = *own.geom.plant;
    Vector& stack = ws_.stack[agent];
    for (int k = 0; k < idx.size(); ++k)
      stack.segment(plant.block_offset(k), plant.block_dim(k)) =
          ws_.mu[idx.ordering[k]];
    if (exact) {
      stack += own.drift_stack_true;
      ws_.flow = own.geom.f[0];
    } else {
      estimated_drift_stack(own, w, ws_.drift[agent]);
      stack += ws_.drift[agent];
      ws_.flow = ws_.fhat[agent];
    }
    ws_.flow.noalias() += own.geom.input_map_state * stack;
    omega.noalias() += own.grad.rightCols(n) * ws_.flow;
  }

  const Vector& mu_own = ws_.mu[agent];
  auto tmp = ws_.tmp_m.head(mu_own.size());
  tmp.noalias() = sys_->costs[agent].control_cost * mu_own;
  delta = w.w_c[agent].dot(omega) + own.cost_value + mu_own.dot(tmp);
}

void GameEval::bellman(int agent, const NetworkWeights& w, Vector& omega,
                       double& delta) const {
  assemble(agent, w, /*exact=*/false, omega, delta);
}

void GameEval::bellman_exact(int agent, const NetworkWeights& w,
                             Vector& omega, double& delta) const {
  assemble(agent, w, /*exact=*/true, omega, delta);
}

std::pair<Vector, double> GameEval::regressor(int agent,
                                              const NetworkWeights& w,
                                              const CriticState& critic)
    const {
  Vector omega(sys_->value_bases[agent].size());
  double delta = 0.0;
  assemble(agent, w, /*exact=*/false, omega, delta);
  const double rho = regressor_normalizer(omega, critic);
  return {std::move(omega), rho};
}

Vector GameEval::control(int agent, const NetworkWeights& w) const {
  const MemberData& md = at(agent);
  const SubgraphPlant& plant = *md.geom.plant;
  const SubgraphIndex& idx = plant.index();
  member_policies(w);
  Vector stack(plant.input_dim_sum());
  for (int k = 0; k < idx.size(); ++k)
    stack.segment(plant.block_offset(k), plant.block_dim(k)) =
        ws_.mu[idx.ordering[k]];
  estimated_drift_stack(md, w, ws_.drift[agent]);
  return md.geom.own_control(stack, ws_.drift[agent]);
}

Vector GameEval::realized_mu(int agent,
                             std::span<const Vector> controls) const {
  const MemberData& md = at(agent);
  const int m = sys_->models.agents[agent].input_dim;
  Vector mu = Vector::Zero(m);
  const double a0 = sys_->net.pinning_gain(agent);
  if (a0 > 0.0) {
    const auto rel = relative_control_terms(
        agent, kLeader, md.geom.leader_state, sys_->formation, sys_->models);
    mu += a0 * (controls[agent] - rel.f);
  }
  for (int j : sys_->net.in_neighbors(agent)) {
    const auto rel = relative_control_terms(
        agent, j, data_.at(j).geom.states[0], sys_->formation, sys_->models);
    mu += sys_->net.edge_weight(agent, j) *
          (controls[agent] - rel.f - rel.g * controls[j]);
  }
  return mu;
}

double regressor_normalizer(const Vector& omega, const CriticState& critic) {
  return 1.0 + critic.normalization * omega.dot(critic.gain * omega);
}

CriticFlow critic_flow(const CriticState& critic, const Vector& omega_t,
                       double rho_t, double delta_t,
                       std::span<const GridSample> grid) {
  const auto L = critic.weights.size();
  CriticFlow out;
  Vector acc = Vector::Zero(L);
  for (const GridSample& s : grid) acc += (s.delta / s.rho) * (*s.omega);
  out.weights_dot =
      -critic.rate_state * (delta_t / rho_t) * (critic.gain * omega_t);
  if (!grid.empty())
    out.weights_dot -=
        (critic.rate_grid / static_cast<double>(grid.size())) *
        (critic.gain * acc);

  if (critic.gain.norm() <= critic.gain_bound) {
    const Vector go = critic.gain * omega_t;
    out.gain_dot = critic.forgetting * critic.gain -
                   (critic.rate_state / (rho_t * rho_t)) * (go * go.transpose());
  } else {
    out.gain_dot = Matrix::Zero(L, L);
  }
  return out;
}

Vector actor_flow(const ActorState& actor, const CriticState& critic,
                  const Matrix& quad_t, const Vector& omega_t, double rho_t,
                  std::span<const GridSample> grid) {
  Vector out = -actor.rate_consensus * (actor.weights - critic.weights) -
               actor.rate_decay * actor.weights;
  out += (0.25 * critic.rate_state * omega_t.dot(critic.weights) / rho_t) *
         (quad_t * actor.weights);
  if (!grid.empty()) {
    const double scale = 0.25 * critic.rate_grid /
                         static_cast<double>(grid.size());
    for (const GridSample& s : grid)
      out += (scale * s.omega->dot(critic.weights) / s.rho) *
             (*s.quad * actor.weights);
  }
  return out;
}

void GridRankTracker::add_sample(std::span<const GridSample> grid) {
  if (grid.empty()) return;
  const auto L = grid.front().omega->size();
  Matrix acc = Matrix::Zero(L, L);
  for (const GridSample& s : grid)
    acc += (*s.omega) * (s.omega->transpose()) / s.rho;
  Eigen::SelfAdjointEigenSolver<Matrix> es(acc, Eigen::EigenvaluesOnly);
  const double v = es.eigenvalues()(0) / static_cast<double>(grid.size());
  min_ = samples_ == 0 ? v : std::min(min_, v);
  ++samples_;
}

}  // namespace graphgame
