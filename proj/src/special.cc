#include "arraysep/special.h"

#include <cmath>
#include <limits>

#include "arraysep/error.h"

namespace arraysep {

namespace {

constexpr double kSeriesLimit = 30.0;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// M(c; b; x) for x >= 0, c > 0, b > 0: all terms positive.
double positive_series(double c, double b, double x) {
  double term = 1.0;
  double sum = 1.0;
  for (int n = 0; n < 10000; ++n) {
    term *= (c + n) / (b + n) * x / (n + 1);
    sum += term;
    if (term < kEps * 0.25 * sum && n > x) break;
  }
  return sum;
}

double asymptotic_negative(double a, double b, double x) {
  const double c = a - b + 1.0;
  double term = 1.0;
  double sum = 1.0;
  double prev_abs = 1.0;
  for (int s = 0; s < 200; ++s) {
    const double next = term * (a + s) * (c + s) / ((s + 1) * x);
    if (std::abs(next) >= prev_abs) break;  // series starts to diverge
    term = next;
    sum += term;
    prev_abs = std::abs(term);
    if (prev_abs < kEps * 0.25 * std::abs(sum)) break;
  }
  return std::exp(std::lgamma(b) - std::lgamma(b - a)) * std::pow(x, -a) * sum;
}

}  // namespace

double hyp1f1_negative_argument(double a, double b, double x) {
  if (!(x >= 0.0)) throw ValidationError("hyp1f1_negative_argument: x must be >= 0");
  if (!(b > 0.0) || !(b - a > 0.0)) throw ValidationError("hyp1f1_negative_argument: need b > 0 and b > a");
  if (x == 0.0) return 1.0;
  if (x <= kSeriesLimit) return std::exp(-x) * positive_series(b - a, b, x);
  return asymptotic_negative(a, b, x);
}

}  // namespace arraysep
