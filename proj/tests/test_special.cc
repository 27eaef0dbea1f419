#include <doctest.h>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/hypergeometric_1F1.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>

#include "arraysep/error.h"
#include "arraysep/special.h"
#include "oracles.h"

using namespace arraysep;

TEST_CASE("Gamma(5/4) constant") {
  using big = boost::multiprecision::cpp_bin_float_50;
  const double reference = static_cast<double>(boost::math::tgamma(big(5) / 4));
  CHECK(kGammaFiveQuarters == doctest::Approx(reference).epsilon(1e-16));
  CHECK(kGammaFiveQuarters == doctest::Approx(std::tgamma(1.25)).epsilon(1e-15));
}

TEST_CASE("M(a; b; -x) against the 100-digit series on both sides of the switch-over") {
  for (double a : {-0.25, -0.5, -0.75, 0.3}) {
    for (double x = 1e-3; x <= 60.0; x *= 1.23) {
      const double got = hyp1f1_negative_argument(a, 1.0, x);
      const double want = oracle::hyp1f1_series(a, 1.0, x);
      CHECK(got == doctest::Approx(want).epsilon(1e-8));
    }
  }
}

TEST_CASE("M(a; b; -x) against Boost for other b") {
  for (double b : {1.5, 2.0, 3.0})
    for (double x : {0.1, 2.0, 10.0, 29.0, 31.0, 45.0})
      CHECK(hyp1f1_negative_argument(-0.25, b, x) ==
            doctest::Approx(boost::math::hypergeometric_1F1(-0.25, b, -x)).epsilon(1e-8));
}

TEST_CASE("M(a; b; 0) = 1 and invalid arguments") {
  CHECK(hyp1f1_negative_argument(-0.25, 1.0, 0.0) == 1.0);
  CHECK_THROWS_AS(hyp1f1_negative_argument(-0.25, 1.0, -1.0), ValidationError);
  CHECK_THROWS_AS(hyp1f1_negative_argument(1.0, 1.0, 1.0), ValidationError);
}
