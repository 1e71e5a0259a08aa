#include "graphgame/identifier.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <ostream>

namespace graphgame {

DriftEstimate::DriftEstimate(Matrix w, Vector g, double k)
    : weights(std::move(w)), gains(std::move(g)), cl_gain(k) {
  if (cl_gain < 0.0) throw std::invalid_argument("cl gain must be >= 0");
  if ((gains.array() <= 0.0).any())
    throw std::invalid_argument("adaptation gains must be positive");
  if (gains.size() != weights.rows())
    throw std::invalid_argument("gain size does not match weight rows");
}

HistoryStack::HistoryStack(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw std::invalid_argument("stack capacity must be >= 1");
}

double HistoryStack::metric_of(const Matrix& gram) const {
  // Closed forms for the small cases keep the swap search cheap.
  if (gram.rows() == 1) return gram(0, 0);
  if (gram.rows() == 2) {
    const double mid = 0.5 * (gram(0, 0) + gram(1, 1));
    const double off = 0.5 * (gram(0, 0) - gram(1, 1));
    return mid - std::sqrt(off * off + gram(0, 1) * gram(0, 1));
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

bool HistoryStack::try_insert_svmax(StackEntry entry) {
  const auto dim = entry.sigma.size();
  if (gram_.size() == 0) gram_ = Matrix::Zero(dim, dim);
  if (entry.sigma.size() != gram_.rows())
    throw std::invalid_argument("regression vector dimension changed");

  if (size() < capacity_) {
    gram_ += entry.sigma * entry.sigma.transpose();
    entries_.push_back(std::move(entry));
    metric_ = metric_of(gram_);
    return true;
  }

  // Exhaustive single-slot swap search.
  int best = -1;
  double best_metric = metric_;
  const Matrix cand_outer = entry.sigma * entry.sigma.transpose();
  const Matrix base = gram_ + cand_outer;
  Matrix swapped(gram_.rows(), gram_.cols());
  for (int j = 0; j < size(); ++j) {
    swapped = base;
    swapped.noalias() -= entries_[j].sigma * entries_[j].sigma.transpose();
    const double m = metric_of(swapped);
    if (m > best_metric) {
      best_metric = m;
      best = j;
    }
  }
  if (best < 0) return false;
  gram_ += cand_outer - entries_[best].sigma * entries_[best].sigma.transpose();
  entries_[best] = std::move(entry);
  metric_ = best_metric;
  return true;
}

StackEntry make_stack_entry(double t, const Vector& x, const Vector& u,
                            const Vector& xdot, const DriftBasis& basis,
                            const AgentModel& model) {
  StackEntry e;
  e.t = t;
  e.x = x;
  e.u = u;
  e.xdot = xdot;
  e.sigma = basis.eval(x);
  e.gu = model.effectiveness(x) * u;
  return e;
}

Vector observer_flow(const StateObserver& obs, const Vector& x,
                     const Vector& u, const Matrix& theta_hat,
                     const DriftBasis& basis, const AgentModel& model) {
  return theta_hat.transpose() * basis.eval(x) +
         model.effectiveness(x) * u + obs.gain * (x - obs.x_hat);
}

Matrix cl_update_flow(const DriftEstimate& est, const HistoryStack& stack,
                      const Vector& x, const Vector& x_tilde,
                      const DriftBasis& basis) {
  Matrix flow = Matrix::Zero(est.weights.rows(), est.weights.cols());
  for (const StackEntry& e : stack.entries()) {
    const Vector residual =
        e.xdot - e.gu - est.weights.transpose() * e.sigma;
    flow += e.sigma * residual.transpose();
  }
  flow *= est.cl_gain;
  flow += basis.eval(x) * x_tilde.transpose();
  return est.gains.asDiagonal() * flow;
}

double stack_rank_metric(const HistoryStack& stack) {
  return stack.rank_metric();
}

void cl_exact_update(DriftEstimate& est, const HistoryStack& stack,
                     double dt) {
  if (stack.empty() || est.cl_gain == 0.0) return;
  const auto p = est.weights.rows();
  Matrix gram = Matrix::Zero(p, p);
  Matrix cross = Matrix::Zero(p, est.weights.cols());
  for (const StackEntry& e : stack.entries()) {
    gram += e.sigma * e.sigma.transpose();
    cross += e.sigma * (e.xdot - e.gu).transpose();
  }
  // d theta = k Gamma (cross - gram theta). Symmetrize through
  // S = Gamma^{1/2} and integrate exactly over dt.
  const Vector s = est.gains.array().sqrt();
  const Matrix sym =
      est.cl_gain * (s.asDiagonal() * gram * s.asDiagonal());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  Vector phi(p);
  for (Eigen::Index k = 0; k < p; ++k) {
    const double lam = es.eigenvalues()(k);
    phi(k) = lam > 1e-14 ? (1.0 - std::exp(-lam * dt)) / lam : dt;
  }
  const Matrix relax = s.asDiagonal() * es.eigenvectors() * phi.asDiagonal() *
                       es.eigenvectors().transpose() *
                       s.cwiseInverse().asDiagonal();
  const Matrix drive =
      est.cl_gain * (est.gains.asDiagonal() * (cross - gram * est.weights));
  est.weights += relax * drive;
}

void dump_history_csv(const HistoryStack& stack, std::ostream& os) {
  os << "t,x,u,xdot_est\n";
  for (const StackEntry& e : stack.entries()) {
    os << e.t;
    for (Eigen::Index k = 0; k < e.x.size(); ++k) os << ',' << e.x(k);
    for (Eigen::Index k = 0; k < e.u.size(); ++k) os << ',' << e.u(k);
    for (Eigen::Index k = 0; k < e.xdot.size(); ++k) os << ',' << e.xdot(k);
    os << '\n';
  }
}

}  // namespace graphgame
