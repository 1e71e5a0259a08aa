#pragma once

#include <vector>

#include "graphgame/types.hpp"

namespace graphgame {

/// Weighted directed communication topology with pinning to a leader node.
///
/// Entry adjacency(i, j) is the weight a_ij on the edge from node j to
/// node i; pinning(i) is the gain a_i0 coupling agent i directly to the
/// leader. Immutable after construction.
class DirectedNetwork {
 public:
  /// Throws std::invalid_argument on negative weights, nonzero diagonal,
  /// or mismatched sizes. When `normalize_weights` is set, each row of
  /// [adjacency | pinning] is rescaled so its weights sum to one (rows
  /// with no incoming edges are left untouched).
  DirectedNetwork(Matrix adjacency, Vector pinning,
                  bool normalize_weights = false);

  int size() const { return static_cast<int>(pinning_.size()); }

  double edge_weight(int i, int j) const { return adjacency_(i, j); }
  double pinning_gain(int i) const { return pinning_(i); }

  const Matrix& adjacency() const { return adjacency_; }
  const Vector& pinning() const { return pinning_; }

  /// Weighted in-degree d_i over network neighbors only.
  double weighted_in_degree(int i) const;

  /// d_i + a_i0: the total gain sum over in-neighbors and the leader.
  double neighbor_gain_sum(int i) const;

  /// Network in-neighbors of i (ascending index).
  std::vector<int> in_neighbors(int i) const;

  /// Weight on the edge from `j` to `i`, treating kLeader as the leader.
  double gain(int i, int j) const {
    return j == kLeader ? pinning_(i) : adjacency_(i, j);
  }

 private:
  Matrix adjacency_;
  Vector pinning_;
};

/// Ordering of the extended subgraph of one agent: `ordering` enumerates
/// the members with the owner first, remaining members ascending.
struct SubgraphIndex {
  int agent = 0;
  std::vector<int> ordering;

  int size() const { return static_cast<int>(ordering.size()); }

  /// Position of `a` in the ordering, or -1 when not a member.
  int slot_of(int a) const {
    for (int k = 0; k < size(); ++k)
      if (ordering[k] == a) return k;
    return -1;
  }
};

/// Graph Laplacian L = D - A with D the weighted in-degree matrix.
Matrix laplacian(const DirectedNetwork& net);

/// All agents j != i with a directed path from j to i, ascending order.
/// Throws std::out_of_range on a bad index.
std::vector<int> extended_neighborhood(const DirectedNetwork& net, int i);

/// Subgraph ordering for agent i: i first, extended neighbors ascending.
SubgraphIndex subgraph_index(const DirectedNetwork& net, int i);

/// True iff every agent is reachable from the leader through pinning
/// edges followed by directed network edges.
bool verify_spanning_tree(const DirectedNetwork& net);

/// True iff L + A0 is numerically nonsingular. The determinant is
/// compared against the product of row norms so the test is scale free.
bool formation_matrix_nonsingular(const DirectedNetwork& net,
                                  double tol = 1e-10);

}  // namespace graphgame
