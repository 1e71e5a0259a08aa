#pragma once

#include <functional>
#include <memory>

#include "graphgame/basis.hpp"
#include "graphgame/graph.hpp"
#include "graphgame/identifier.hpp"
#include "graphgame/plant.hpp"

namespace graphgame {

/// Quadratic-like running cost: a positive definite state cost plus a
/// quadratic control penalty.
struct CostSpec {
  std::function<double(const Vector&)> state_cost;  // Q_i
  Matrix control_cost;                              // R_i, SPD
  Matrix control_cost_inv;

  static CostSpec quadratic(double q, Matrix r);
};

/// Immutable description of one networked game: topology, models,
/// formation, and per-agent approximation structure. Validates the
/// spanning tree and cost definiteness on construction. Not copyable;
/// the subgraph plants keep references into this object.
class GameSystem {
 public:
  GameSystem(DirectedNetwork net, ModelSet models, FormationSpec formation,
             std::vector<DriftBasis> drift_bases,
             std::vector<PolyBasis> value_bases, std::vector<CostSpec> costs);

  GameSystem(const GameSystem&) = delete;
  GameSystem& operator=(const GameSystem&) = delete;

  int agents() const { return net.size(); }
  int state_dim() const { return models.state_dim(); }

  const SubgraphIndex& subgraph(int i) const { return subgraphs.at(i); }
  const SubgraphPlant& plant(int i) const { return *plants.at(i); }

  DirectedNetwork net;
  ModelSet models;
  FormationSpec formation;
  std::vector<SubgraphIndex> subgraphs;
  std::vector<std::unique_ptr<SubgraphPlant>> plants;
  std::vector<DriftBasis> drift_bases;
  std::vector<PolyBasis> value_bases;
  std::vector<CostSpec> costs;
};

}  // namespace graphgame
