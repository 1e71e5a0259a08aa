#pragma once

#include <vector>

#include "graphgame/types.hpp"

namespace graphgame {

/// Weighted monomial over a coordinate vector.
struct PolyTerm {
  double coef = 1.0;
  std::vector<int> powers;  // one exponent per coordinate
};

/// Polynomial dictionary used as a value-function basis. Each element is
/// a sum of monomials; gradients are analytic.
class PolyBasis {
 public:
  PolyBasis() = default;
  PolyBasis(int input_dim, std::vector<std::vector<PolyTerm>> elements);

  int input_dim() const { return input_dim_; }
  int size() const { return static_cast<int>(elements_.size()); }

  Vector eval(const Vector& z) const;
  /// Jacobian of eval, size() x input_dim().
  Matrix gradient(const Vector& z) const;

  /// Convenience: single-monomial element.
  static std::vector<PolyTerm> monomial(double coef, std::vector<int> powers);

 private:
  int input_dim_ = 0;
  std::vector<std::vector<PolyTerm>> elements_;
};

/// Max |analytic - central difference| over the gradient entries at z,
/// relative to the gradient scale. Test support.
double gradient_fd_error(const PolyBasis& basis, const Vector& z,
                         double step = 1e-5);

}  // namespace graphgame
