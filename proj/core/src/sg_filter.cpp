#include "graphgame/sg_filter.hpp"

#include <cmath>

namespace graphgame {

namespace {

void check_window(int window, int degree) {
  if (degree < 1) throw std::invalid_argument("degree must be positive");
  if (window < degree + 2)
    throw std::invalid_argument("window too short for the fit degree");
  if (window % 2 == 0) throw std::invalid_argument("window must be odd");
}

}  // namespace

Vector sg_derivative_weights(int window, double dt, int degree) {
  check_window(window, degree);
  if (dt <= 0.0) throw std::invalid_argument("dt must be positive");
  const int half = window / 2;
  // Fit in integer abscissae k = -half..half; the derivative in time is
  // the k-derivative divided by dt.
  Matrix vand(window, degree + 1);
  for (int r = 0; r < window; ++r) {
    double p = 1.0;
    for (int d = 0; d <= degree; ++d) {
      vand(r, d) = p;
      p *= static_cast<double>(r - half);
    }
  }
  const Matrix normal = vand.transpose() * vand;
  const Matrix proj = normal.ldlt().solve(vand.transpose());
  return proj.row(1).transpose() / dt;
}

double sg_derivative(std::span<const double> samples, double dt, int degree) {
  const Vector w =
      sg_derivative_weights(static_cast<int>(samples.size()), dt, degree);
  double out = 0.0;
  for (size_t k = 0; k < samples.size(); ++k) out += w(k) * samples[k];
  return out;
}

double sg_derivative(std::span<const double> times,
                     std::span<const double> samples, int degree) {
  if (times.size() != samples.size())
    throw std::invalid_argument("times and samples differ in length");
  if (times.size() < 2) throw std::invalid_argument("window too short");
  const double dt = times[1] - times[0];
  if (dt <= 0.0) throw std::invalid_argument("timestamps must increase");
  for (size_t k = 1; k < times.size(); ++k) {
    const double step = times[k] - times[k - 1];
    if (std::abs(step - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
      throw std::invalid_argument("non-uniform sample spacing");
  }
  return sg_derivative(samples, dt, degree);
}

Vector sg_derivative(std::span<const Vector> samples, double dt, int degree) {
  const Vector w =
      sg_derivative_weights(static_cast<int>(samples.size()), dt, degree);
  Vector out = Vector::Zero(samples[0].size());
  for (size_t k = 0; k < samples.size(); ++k) out += w(k) * samples[k];
  return out;
}

}  // namespace graphgame
