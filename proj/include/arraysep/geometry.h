#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace arraysep {

// Far-field array description: element positions in metres and unit
// direction vectors pointing from the array towards each source.
struct ArrayScene {
  std::vector<Eigen::Vector3d> mic_positions;
  std::vector<Eigen::Vector3d> source_directions;
  double speed_of_sound = 343.0;
  double sample_rate = 16000.0;

  std::size_t num_mics() const { return mic_positions.size(); }
  std::size_t num_sources() const { return source_directions.size(); }

  // Throws ValidationError on an empty array, a non-positive speed of sound
  // or sample rate, or a direction whose norm differs from 1 by more than 1e-9.
  void validate() const;
};

// Unit vector for an azimuth/elevation pair in degrees (azimuth measured
// counter-clockwise from +x in the horizontal plane).
Eigen::Vector3d direction_from_azimuth(double azimuth_deg, double elevation_deg = 0.0);

// N mics equally spaced on a horizontal circle, the first on +x.
std::vector<Eigen::Vector3d> circular_array(std::size_t num_mics, double radius_m);

// Propagation delays in samples, N x M, referenced to the array centroid:
// delta(i, j) = -((p_i - centroid) . d_j) * fs / c. Mics nearer the source
// receive it earlier and get a negative delay; each column sums to zero.
Eigen::MatrixXd delays(const ArrayScene& scene);

// A(k) for k = 0 .. frame_size/2, each N x M with
// a_ij(k) = exp(-j 2 pi (k / frame_size) delta_ij).
using SteeringMatrix = std::vector<Eigen::MatrixXcd>;

SteeringMatrix steering_matrix(const Eigen::MatrixXd& delays, std::size_t frame_size);

// Column j of every A(k), as an N-vector per bin.
std::vector<Eigen::VectorXcd> steering_column(const SteeringMatrix& a, std::size_t source);

}  // namespace arraysep
