#include "arraysep/geometry.h"

#include <cmath>
#include <numbers>

#include "arraysep/error.h"

namespace arraysep {

void ArrayScene::validate() const {
  if (mic_positions.empty()) throw ValidationError("scene has no microphones");
  if (source_directions.empty()) throw ValidationError("scene has no sources");
  if (!(speed_of_sound > 0.0)) throw ValidationError("speed of sound must be positive");
  if (!(sample_rate > 0.0)) throw ValidationError("sample rate must be positive");
  for (const auto& p : mic_positions)
    if (!p.allFinite()) throw ValidationError("microphone position is not finite");
  for (const auto& d : source_directions) {
    const double norm = d.norm();
    if (!(norm > 0.0)) throw ValidationError("source direction has zero norm");
    if (std::abs(norm - 1.0) > 1e-9) throw ValidationError("source direction is not a unit vector");
  }
}

Eigen::Vector3d direction_from_azimuth(double azimuth_deg, double elevation_deg) {
  const double az = azimuth_deg * std::numbers::pi / 180.0;
  const double el = elevation_deg * std::numbers::pi / 180.0;
  return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
}

std::vector<Eigen::Vector3d> circular_array(std::size_t num_mics, double radius_m) {
  std::vector<Eigen::Vector3d> mics;
  mics.reserve(num_mics);
  for (std::size_t i = 0; i < num_mics; ++i) {
    const double phi = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(num_mics);
    mics.emplace_back(radius_m * std::cos(phi), radius_m * std::sin(phi), 0.0);
  }
  return mics;
}

Eigen::MatrixXd delays(const ArrayScene& scene) {
  scene.validate();
  const auto n_mics = static_cast<Eigen::Index>(scene.num_mics());
  const auto n_src = static_cast<Eigen::Index>(scene.num_sources());

  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : scene.mic_positions) centroid += p;
  centroid /= static_cast<double>(n_mics);

  const double scale = scene.sample_rate / scene.speed_of_sound;
  Eigen::MatrixXd d(n_mics, n_src);
  for (Eigen::Index i = 0; i < n_mics; ++i) {
    const Eigen::Vector3d rel = scene.mic_positions[static_cast<std::size_t>(i)] - centroid;
    for (Eigen::Index j = 0; j < n_src; ++j)
      d(i, j) = -rel.dot(scene.source_directions[static_cast<std::size_t>(j)]) * scale;
  }
  return d;
}

SteeringMatrix steering_matrix(const Eigen::MatrixXd& delays, std::size_t frame_size) {
  if (!delays.allFinite()) throw ValidationError("delays must be finite");
  if (frame_size == 0) throw ConfigError("frame_size must be positive");
  const std::size_t bins = frame_size / 2 + 1;
  SteeringMatrix a(bins, Eigen::MatrixXcd(delays.rows(), delays.cols()));
  for (std::size_t k = 0; k < bins; ++k) {
    const double w = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(frame_size);
    for (Eigen::Index i = 0; i < delays.rows(); ++i)
      for (Eigen::Index j = 0; j < delays.cols(); ++j) a[k](i, j) = std::polar(1.0, w * delays(i, j));
  }
  return a;
}

std::vector<Eigen::VectorXcd> steering_column(const SteeringMatrix& a, std::size_t source) {
  std::vector<Eigen::VectorXcd> col;
  col.reserve(a.size());
  for (const auto& ak : a) {
    if (static_cast<Eigen::Index>(source) >= ak.cols()) throw ConfigError("steering column out of range");
    col.emplace_back(ak.col(static_cast<Eigen::Index>(source)));
  }
  return col;
}

}  // namespace arraysep
