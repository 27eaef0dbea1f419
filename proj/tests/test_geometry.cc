#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "arraysep/error.h"
#include "arraysep/geometry.h"

using namespace arraysep;

TEST_CASE("coincident microphones have zero delay") {
  ArrayScene s;
  s.mic_positions.assign(4, Eigen::Vector3d::Zero());
  s.source_directions = {direction_from_azimuth(30), direction_from_azimuth(200, 10)};
  CHECK(delays(s).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("two-mic pair at broadside and endfire") {
  ArrayScene s;
  s.mic_positions = {{0.0, 0.0, 0.0}, {0.34, 0.0, 0.0}};
  s.speed_of_sound = 340.0;
  s.sample_rate = 16000.0;
  s.source_directions = {Eigen::Vector3d::UnitY(), Eigen::Vector3d::UnitX()};
  const auto d = delays(s);
  CHECK(std::abs(d(1, 0) - d(0, 0)) < 1e-12);
  // Independent path-length view: a plane wave from +x reaches x = 0.34 m
  // 0.34 / 340 s before it reaches the origin.
  const double path_difference = (s.mic_positions[0] - s.mic_positions[1]).dot(Eigen::Vector3d::UnitX());
  const double expected = -path_difference / s.speed_of_sound * s.sample_rate;
  CHECK(d(1, 1) - d(0, 1) == doctest::Approx(-16.0).epsilon(1e-12));
  CHECK(d(0, 1) - d(1, 1) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("delays are centred on the array centroid") {
  ArrayScene s;
  s.mic_positions = circular_array(8, 0.25);
  for (double az = 0; az < 360; az += 45) s.source_directions.push_back(direction_from_azimuth(az, 5));
  const auto d = delays(s);
  for (Eigen::Index j = 0; j < d.cols(); ++j) CHECK(std::abs(d.col(j).sum()) < 1e-10);
  // The mic on +x hears a source at azimuth 0 first.
  CHECK(d(0, 0) == doctest::Approx(-0.25 * std::cos(5.0 * std::numbers::pi / 180.0) / 343.0 * 16000.0));
}

TEST_CASE("circular array and azimuth helpers") {
  const auto mics = circular_array(4, 0.5);
  CHECK((mics[0] - Eigen::Vector3d(0.5, 0, 0)).norm() < 1e-12);
  CHECK((mics[1] - Eigen::Vector3d(0, 0.5, 0)).norm() < 1e-12);
  CHECK((direction_from_azimuth(90) - Eigen::Vector3d::UnitY()).norm() < 1e-12);
  CHECK((direction_from_azimuth(0, 90) - Eigen::Vector3d::UnitZ()).norm() < 1e-12);
}

TEST_CASE("steering matrix special cases") {
  const auto zero = steering_matrix(Eigen::MatrixXd::Zero(3, 2), 64);
  REQUIRE(zero.size() == 33);
  for (const auto& a : zero) CHECK((a - Eigen::MatrixXcd::Ones(3, 2)).norm() < 1e-15);

  Eigen::MatrixXd half(1, 1);
  half(0, 0) = 32.0;
  const auto a = steering_matrix(half, 64);
  CHECK(std::abs(a[1](0, 0) - std::complex<double>(-1.0, 0.0)) < 1e-12);
}

TEST_CASE("steering matrix matches direct complex exponentials") {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  Eigen::MatrixXd d(5, 3);
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = u(rng);
  const std::size_t n = 256;
  const auto a = steering_matrix(d, n);
  for (std::size_t k = 0; k <= n / 2; ++k)
    for (Eigen::Index i = 0; i < 5; ++i)
      for (Eigen::Index j = 0; j < 3; ++j) {
        const double phase = -2.0 * std::numbers::pi * static_cast<double>(k) / n * d(i, j);
        const std::complex<double> direct(std::cos(phase), std::sin(phase));
        CHECK(std::abs(a[k](i, j) - direct) < 1e-12);
        CHECK(std::abs(std::abs(a[k](i, j)) - 1.0) < 1e-9);
      }
  for (Eigen::Index i = 0; i < 5; ++i) CHECK(a[0](i, 0) == std::complex<double>(1.0, 0.0));

  // Extending to the full spectrum, the value at normalised frequency 1 - k/n
  // is the conjugate of the value at k/n.
  for (std::size_t k = 1; k < n / 2; ++k) {
    const double phase = -2.0 * std::numbers::pi * (1.0 - static_cast<double>(k) / n) * d(2, 1);
    const std::complex<double> mirrored(std::cos(phase), std::sin(phase));
    // exp(-j 2 pi delta) differs from 1 for fractional delays, so compare
    // after removing that full-cycle phase.
    const double full = -2.0 * std::numbers::pi * d(2, 1);
    const std::complex<double> cycle(std::cos(full), std::sin(full));
    CHECK(std::abs(mirrored / cycle - std::conj(a[k](2, 1))) < 1e-9);
  }

  const auto col = steering_column(a, 2);
  REQUIRE(col.size() == a.size());
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(col[k] == a[k].col(2));
}

TEST_CASE("scene validation") {
  ArrayScene s;
  s.source_directions = {Eigen::Vector3d::UnitX()};
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s.mic_positions = circular_array(2, 0.1);
  CHECK_NOTHROW(s.validate());
  s.source_directions = {Eigen::Vector3d(1.0, 1.0, 0.0)};
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s.source_directions = {Eigen::Vector3d::Zero()};
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s.source_directions = {Eigen::Vector3d::UnitX()};
  s.speed_of_sound = 0.0;
  CHECK_THROWS_AS(s.validate(), ValidationError);
}
