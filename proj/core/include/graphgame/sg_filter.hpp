#pragma once

#include <span>

#include "graphgame/types.hpp"

namespace graphgame {

/// Weights w such that w . samples is the first derivative at the center
/// of a uniformly spaced window, from a least-squares polynomial fit of
/// the given degree. Window must be odd and at least degree + 2.
Vector sg_derivative_weights(int window, double dt, int degree = 5);

/// First derivative of the degree-5 least-squares fit, evaluated at the
/// window center. Throws std::invalid_argument for short windows.
double sg_derivative(std::span<const double> samples, double dt,
                     int degree = 5);

/// Variant with explicit timestamps; rejects non-uniform spacing.
double sg_derivative(std::span<const double> times,
                     std::span<const double> samples, int degree = 5);

/// Component-wise derivative of a vector-valued window.
Vector sg_derivative(std::span<const Vector> samples, double dt,
                     int degree = 5);

}  // namespace graphgame
