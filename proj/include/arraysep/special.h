#pragma once

namespace arraysep {

// Confluent hypergeometric function of the first kind evaluated at a
// non-positive argument, M(a; b; -x) for x >= 0 and b - a > 0.
//
// For x <= 30 the Kummer transform M(a; b; -x) = e^-x M(b - a; b; x) turns the
// alternating Taylor series into one with positive terms. Beyond that the
// large-argument expansion
//   M(a; b; -x) ~ Gamma(b) / Gamma(b - a) x^-a sum_s (a)_s (a - b + 1)_s / s! x^-s
// is summed up to its smallest term.
double hyp1f1_negative_argument(double a, double b, double x);

// Gamma(5/4), the constant of the loudness-domain (alpha = 1/2) gain.
inline constexpr double kGammaFiveQuarters = 0.9064024770554770779827;

}  // namespace arraysep
