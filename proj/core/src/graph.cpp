#include "graphgame/graph.hpp"

#include <algorithm>
#include <deque>

namespace graphgame {

DirectedNetwork::DirectedNetwork(Matrix adjacency, Vector pinning,
                                 bool normalize_weights)
    : adjacency_(std::move(adjacency)), pinning_(std::move(pinning)) {
  const auto n = pinning_.size();
  if (n < 1) throw std::invalid_argument("network needs at least one agent");
  if (adjacency_.rows() != n || adjacency_.cols() != n)
    throw std::invalid_argument("adjacency size does not match pinning size");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (pinning_(i) < 0.0)
      throw std::invalid_argument("pinning gains must be nonnegative");
    if (adjacency_(i, i) != 0.0)
      throw std::invalid_argument("self edges are not allowed");
    for (Eigen::Index j = 0; j < n; ++j)
      if (adjacency_(i, j) < 0.0)
        throw std::invalid_argument("edge weights must be nonnegative");
  }
  if (normalize_weights) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double total = adjacency_.row(i).sum() + pinning_(i);
      if (total > 0.0) {
        adjacency_.row(i) /= total;
        pinning_(i) /= total;
      }
    }
  }
}

double DirectedNetwork::weighted_in_degree(int i) const {
  return adjacency_.row(i).sum();
}

double DirectedNetwork::neighbor_gain_sum(int i) const {
  return weighted_in_degree(i) + pinning_(i);
}

std::vector<int> DirectedNetwork::in_neighbors(int i) const {
  std::vector<int> out;
  for (int j = 0; j < size(); ++j)
    if (adjacency_(i, j) > 0.0) out.push_back(j);
  return out;
}

Matrix laplacian(const DirectedNetwork& net) {
  const int n = net.size();
  Matrix lap = -net.adjacency();
  for (int i = 0; i < n; ++i) lap(i, i) = net.weighted_in_degree(i);
  return lap;
}

namespace {

void check_index(const DirectedNetwork& net, int i) {
  if (i < 0 || i >= net.size())
    throw std::out_of_range("agent index out of range");
}

}  // namespace

std::vector<int> extended_neighborhood(const DirectedNetwork& net, int i) {
  check_index(net, i);
  // Reverse reachability: breadth-first over incoming edges, ascending
  // visit order for determinism.
  std::vector<bool> seen(net.size(), false);
  std::deque<int> frontier{i};
  std::vector<int> reached;
  while (!frontier.empty()) {
    const int v = frontier.front();
    frontier.pop_front();
    for (int j : net.in_neighbors(v)) {
      if (!seen[j]) {
        seen[j] = true;
        frontier.push_back(j);
        if (j != i) reached.push_back(j);
      }
    }
  }
  std::sort(reached.begin(), reached.end());
  return reached;
}

SubgraphIndex subgraph_index(const DirectedNetwork& net, int i) {
  check_index(net, i);
  SubgraphIndex idx;
  idx.agent = i;
  idx.ordering.push_back(i);
  for (int j : extended_neighborhood(net, i)) idx.ordering.push_back(j);
  return idx;
}

bool verify_spanning_tree(const DirectedNetwork& net) {
  // Forward reachability from the leader: pinning edges seed the frontier,
  // then directed edges j -> i expand it.
  const int n = net.size();
  std::vector<bool> seen(n, false);
  std::deque<int> frontier;
  for (int i = 0; i < n; ++i) {
    if (net.pinning_gain(i) > 0.0) {
      seen[i] = true;
      frontier.push_back(i);
    }
  }
  while (!frontier.empty()) {
    const int j = frontier.front();
    frontier.pop_front();
    for (int i = 0; i < n; ++i) {
      if (!seen[i] && net.edge_weight(i, j) > 0.0) {
        seen[i] = true;
        frontier.push_back(i);
      }
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

bool formation_matrix_nonsingular(const DirectedNetwork& net, double tol) {
  Matrix m = laplacian(net);
  m.diagonal() += net.pinning();
  double scale = 1.0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double rn = m.row(r).norm();
    if (rn == 0.0) return false;
    scale *= rn;
  }
  return std::abs(m.determinant()) > tol * scale;
}

}  // namespace graphgame
