#include "graphgame/basis.hpp"

#include <cmath>

namespace graphgame {

PolyBasis::PolyBasis(int input_dim, std::vector<std::vector<PolyTerm>> elements)
    : input_dim_(input_dim), elements_(std::move(elements)) {
  if (input_dim_ < 1) throw std::invalid_argument("basis needs coordinates");
  for (const auto& elem : elements_)
    for (const auto& term : elem)
      if (static_cast<int>(term.powers.size()) != input_dim_)
        throw std::invalid_argument("monomial exponent count mismatch");
}

namespace {

double monomial_value(const PolyTerm& term, const Vector& z) {
  double v = term.coef;
  for (size_t c = 0; c < term.powers.size(); ++c) {
    for (int p = 0; p < term.powers[c]; ++p) v *= z(c);
  }
  return v;
}

}  // namespace

Vector PolyBasis::eval(const Vector& z) const {
  if (z.size() != input_dim_)
    throw std::invalid_argument("basis input dimension mismatch");
  Vector out = Vector::Zero(size());
  for (int e = 0; e < size(); ++e)
    for (const auto& term : elements_[e]) out(e) += monomial_value(term, z);
  return out;
}

Matrix PolyBasis::gradient(const Vector& z) const {
  if (z.size() != input_dim_)
    throw std::invalid_argument("basis input dimension mismatch");
  Matrix out = Matrix::Zero(size(), input_dim_);
  for (int e = 0; e < size(); ++e) {
    for (const auto& term : elements_[e]) {
      for (int c = 0; c < input_dim_; ++c) {
        const int p = term.powers[c];
        if (p == 0) continue;
        double v = term.coef * p;
        for (size_t d = 0; d < term.powers.size(); ++d) {
          const int q = term.powers[d] - (static_cast<int>(d) == c ? 1 : 0);
          for (int r = 0; r < q; ++r) v *= z(d);
        }
        out(e, c) += v;
      }
    }
  }
  return out;
}

std::vector<PolyTerm> PolyBasis::monomial(double coef,
                                          std::vector<int> powers) {
  return {PolyTerm{coef, std::move(powers)}};
}

double gradient_fd_error(const PolyBasis& basis, const Vector& z,
                         double step) {
  const Matrix grad = basis.gradient(z);
  double scale = std::max(1.0, grad.cwiseAbs().maxCoeff());
  double worst = 0.0;
  Vector zp = z, zm = z;
  for (int c = 0; c < basis.input_dim(); ++c) {
    zp(c) += step;
    zm(c) -= step;
    const Vector diff = (basis.eval(zp) - basis.eval(zm)) / (2.0 * step);
    worst = std::max(worst, (diff - grad.col(c)).cwiseAbs().maxCoeff());
    zp(c) = z(c);
    zm(c) = z(c);
  }
  return worst / scale;
}

}  // namespace graphgame
