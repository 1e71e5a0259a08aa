#pragma once

#include <functional>
#include <span>
#include <vector>

#include "graphgame/plant.hpp"
#include "graphgame/types.hpp"

namespace graphgame {

/// Regression basis for one agent's drift: f(x) ~ theta^T sigma(x).
struct DriftBasis {
  std::function<Vector(const Vector&)> eval;
  int dim = 0;  // P + 1
};

/// Drift weight estimate with its adaptation gains.
struct DriftEstimate {
  Matrix weights;  // (P+1) x n
  Vector gains;    // diagonal of the adaptation gain matrix, positive
  double cl_gain = 1.0;

  DriftEstimate() = default;
  DriftEstimate(Matrix w, Vector g, double k);
};

/// Recorded sample driving the batch term of the weight update. The
/// regression vector and the input contribution are cached at insertion.
struct StackEntry {
  double t = 0.0;
  Vector x;
  Vector u;
  Vector xdot;   // numerically differentiated state derivative
  Vector sigma;  // basis at x
  Vector gu;     // g(x) u
};

/// Fixed-capacity buffer of recorded samples. Insertions maximize the
/// minimum eigenvalue of the regression Gram sum, so the rank metric
/// never decreases.
class HistoryStack {
 public:
  explicit HistoryStack(int capacity);

  int capacity() const { return capacity_; }
  int size() const { return static_cast<int>(entries_.size()); }
  bool empty() const { return entries_.empty(); }
  std::span<const StackEntry> entries() const { return entries_; }

  /// lambda_min of the Gram sum of recorded regression vectors.
  double rank_metric() const { return metric_; }

  /// Appends when not full; otherwise performs the single-slot swap that
  /// maximizes the rank metric, and only if it strictly increases it.
  /// Returns whether the candidate was kept.
  bool try_insert_svmax(StackEntry entry);

 private:
  double metric_of(const Matrix& gram) const;

  int capacity_;
  std::vector<StackEntry> entries_;
  Matrix gram_;
  double metric_ = 0.0;
};

StackEntry make_stack_entry(double t, const Vector& x, const Vector& u,
                            const Vector& xdot, const DriftBasis& basis,
                            const AgentModel& model);

/// State observer estimate with its feedback gain.
struct StateObserver {
  Vector x_hat;
  double gain = 1.0;
};

/// Observer dynamics: estimated drift plus known input effect plus
/// feedback on the estimation error x - x_hat.
Vector observer_flow(const StateObserver& obs, const Vector& x,
                     const Vector& u, const Matrix& theta_hat,
                     const DriftBasis& basis, const AgentModel& model);

/// Weight adaptation: batch residual term over the recorded stack plus
/// the instantaneous observer-error term. Empty stack drops the batch
/// term.
Matrix cl_update_flow(const DriftEstimate& est, const HistoryStack& stack,
                      const Vector& x, const Vector& x_tilde,
                      const DriftBasis& basis);

double stack_rank_metric(const HistoryStack& stack);

/// Exact relaxation of the batch term over one step: integrates
/// d theta = k Gamma (C - G theta) with the stack frozen, via the
/// eigendecomposition of the (gain-weighted) Gram sum. Used to keep the
/// fixed-step integrator stable when k * lambda_max(G) * dt is large.
void cl_exact_update(DriftEstimate& est, const HistoryStack& stack,
                     double dt);

/// Debug dump, one line per recorded sample: t, x, u, xdot_est.
void dump_history_csv(const HistoryStack& stack, std::ostream& os);

}  // namespace graphgame
