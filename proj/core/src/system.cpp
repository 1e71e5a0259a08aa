#include "graphgame/system.hpp"

#include <Eigen/Cholesky>

namespace graphgame {

CostSpec CostSpec::quadratic(double q, Matrix r) {
  if (q <= 0.0) throw std::invalid_argument("state cost weight must be > 0");
  CostSpec spec;
  spec.state_cost = [q](const Vector& e) { return q * e.squaredNorm(); };
  Eigen::LLT<Matrix> llt(r);
  if (r.rows() != r.cols() || !r.isApprox(r.transpose(), 1e-12) ||
      llt.info() != Eigen::Success)
    throw std::invalid_argument("control cost must be symmetric positive definite");
  spec.control_cost_inv = llt.solve(Matrix::Identity(r.rows(), r.cols()));
  spec.control_cost = std::move(r);
  return spec;
}

GameSystem::GameSystem(DirectedNetwork net_in, ModelSet models_in,
                       FormationSpec formation_in,
                       std::vector<DriftBasis> drift_bases_in,
                       std::vector<PolyBasis> value_bases_in,
                       std::vector<CostSpec> costs_in)
    : net(std::move(net_in)),
      models(std::move(models_in)),
      formation(std::move(formation_in)),
      drift_bases(std::move(drift_bases_in)),
      value_bases(std::move(value_bases_in)),
      costs(std::move(costs_in)) {
  const int N = net.size();
  if (models.size() != N || static_cast<int>(formation.offsets.size()) != N ||
      static_cast<int>(drift_bases.size()) != N ||
      static_cast<int>(value_bases.size()) != N ||
      static_cast<int>(costs.size()) != N)
    throw std::invalid_argument("per-agent data does not match network size");
  if (!verify_spanning_tree(net))
    throw std::invalid_argument("topology has no spanning tree from the leader");
  const int n = models.state_dim();
  for (int i = 0; i < N; ++i) {
    if (models.agents[i].state_dim != n)
      throw std::invalid_argument("agents must share the state dimension");
    if (formation.offsets[i].size() != n)
      throw std::invalid_argument("formation offset dimension mismatch");
    // Positive definiteness probes on the state cost.
    if (costs[i].state_cost(Vector::Zero(n)) != 0.0)
      throw std::invalid_argument("state cost must vanish at zero");
    Vector probe = Vector::Constant(n, 0.37);
    if (costs[i].state_cost(probe) <= 0.0 || costs[i].state_cost(-probe) <= 0.0)
      throw std::invalid_argument("state cost must be positive away from zero");
  }
  for (int i = 0; i < N; ++i) {
    subgraphs.push_back(subgraph_index(net, i));
    const int dim = n * (subgraphs[i].size() + 1);
    if (value_bases[i].input_dim() != dim)
      throw std::invalid_argument("value basis dimension mismatch for agent " +
                                  std::to_string(i));
  }
  for (int i = 0; i < N; ++i)
    plants.push_back(std::make_unique<SubgraphPlant>(net, models, formation,
                                                     subgraphs[i]));
}

}  // namespace graphgame
