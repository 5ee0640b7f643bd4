#pragma once

#include <functional>
#include <vector>

#include "kirchpeak/field.hpp"

namespace kirchpeak::spectral {

// |xi|^{2s} multiplier. The zero mode is mapped to zero.
Field fractional_laplacian(const Field& f, double s);
// |xi|^{s} multiplier, so that applying it twice equals fractional_laplacian.
Field half_laplacian(const Field& f, double s);
// Solves (c (-Delta)^s + 1) u = g.
Field invert_shifted(const Field& g, double c, double s);
// Solves (c (-Delta)^s + m) u = g for m > 0.
Field invert_shifted(const Field& g, double c, double s, double m);

// Rectangle-rule quadrature h^N * sum.
double integrate(const Field& f);
double inner(const Field& f, const Field& g);
double norm_l2(const Field& f);
double norm_lq(const Field& f, double q);

// Integral of (-Delta)^{s/2} f * (-Delta)^{s/2} g evaluated by Parseval.
double dot_half(const Field& f, const Field& g, double s);
double seminorm_sq(const Field& f, double s);

// Spectral partial derivative along `axis`; the Nyquist mode is zeroed.
Field derivative(const Field& f, int axis);
// Returns x -> f(x - shift) by phase shift of the trigonometric interpolant.
Field translate(const Field& f, const Point& shift);
// Reflection x -> 2c - x about the grid center.
Field reflect(const Field& f);
// Average of f and its reflection.
Field symmetrize(const Field& f);

// Values of the trigonometric interpolant of f at arbitrary points.
std::vector<double> interpolate(const Field& f, const std::vector<Point>& points);

// Generic real radial multiplier m(|xi|).
Field apply_radial_multiplier(const Field& f, const std::function<double(double)>& m);

// Random real field with spectral support |k| <= kmax (integer mode index),
// produced from a seeded generator; max amplitude normalized to 1.
Field random_band_limited(const GridSpec& g, int kmax, unsigned long seed);

void check_order(double s);

}  // namespace kirchpeak::spectral
