#include "arraysep/gss.h"

#include <algorithm>
#include <string>

#include "arraysep/error.h"

namespace arraysep {

SeparationState::SeparationState(std::size_t num_bins, std::size_t num_mics, double mu)
    : num_mics_(num_mics), mu_(mu), weights_(num_bins, Eigen::MatrixXcd(0, static_cast<Eigen::Index>(num_mics))) {
  if (num_bins == 0 || num_mics == 0) throw ConfigError("SeparationState needs bins and microphones");
}

std::size_t SeparationState::row_of(int id) const {
  const auto it = std::find(ids_.begin(), ids_.end(), id);
  if (it == ids_.end()) throw ValidationError("unknown source id " + std::to_string(id));
  return static_cast<std::size_t>(it - ids_.begin());
}

bool SeparationState::contains(int id) const {
  return std::find(ids_.begin(), ids_.end(), id) != ids_.end();
}

bool SeparationState::operator==(const SeparationState& other) const {
  if (num_mics_ != other.num_mics_ || mu_ != other.mu_ || ids_ != other.ids_ ||
      weights_.size() != other.weights_.size())
    return false;
  for (std::size_t k = 0; k < weights_.size(); ++k)
    if (weights_[k].rows() != other.weights_[k].rows() || weights_[k] != other.weights_[k]) return false;
  return true;
}

SpectralFrame separate(const SeparationState& state, const SpectralFrame& x) {
  if (x.num_bins() != state.num_bins()) throw ConfigError("separate: bin count mismatch");
  if (x.channels() != state.num_mics()) throw ConfigError("separate: microphone count mismatch");
  SpectralFrame y;
  y.frame_index = x.frame_index;
  y.bins.resize(static_cast<Eigen::Index>(state.num_sources()), x.bins.cols());
  for (std::size_t k = 0; k < state.num_bins(); ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    y.bins.col(col).noalias() = state.weights(k) * x.bins.col(col);
  }
  return y;
}

void init_column(SeparationState& state, const std::vector<Eigen::VectorXcd>& steering, int id) {
  if (state.contains(id)) throw ValidationError("duplicate source id " + std::to_string(id));
  if (steering.size() != state.num_bins()) throw ConfigError("init_column: steering bin count mismatch");
  const auto n = static_cast<Eigen::Index>(state.num_mics());
  for (const auto& a : steering)
    if (a.size() != n) throw ConfigError("init_column: steering vector length mismatch");

  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < state.num_bins(); ++k) {
    auto& w = state.weights_[k];
    const Eigen::Index row = w.rows();
    w.conservativeResize(row + 1, n);
    w.row(row) = steering[k].adjoint() * inv_n;
  }
  state.ids_.push_back(id);
}

void add_source(SeparationState& state, const std::vector<Eigen::VectorXcd>& steering, int id) {
  init_column(state, steering, id);
}

void remove_source(SeparationState& state, int id) {
  const auto row = static_cast<Eigen::Index>(state.row_of(id));
  for (auto& w : state.weights_) {
    const Eigen::Index rows = w.rows();
    Eigen::MatrixXcd kept(rows - 1, w.cols());
    kept.topRows(row) = w.topRows(row);
    kept.bottomRows(rows - row - 1) = w.bottomRows(rows - row - 1);
    w = std::move(kept);
  }
  state.ids_.erase(state.ids_.begin() + row);
}

Eigen::MatrixXcd decorrelation_error(const Eigen::VectorXcd& y) {
  Eigen::MatrixXcd e = y * y.adjoint();
  e.diagonal().setZero();
  return e;
}

double cost_j1(const Eigen::MatrixXcd& w, const Eigen::VectorXcd& x) {
  return decorrelation_error(w * x).squaredNorm();
}

double cost_j2(const Eigen::MatrixXcd& w, const Eigen::MatrixXcd& a) {
  Eigen::MatrixXcd c = w * a;
  c.diagonal().array() -= 1.0;
  return c.squaredNorm();
}

Eigen::MatrixXcd gradient_j1(const Eigen::MatrixXcd& w, const Eigen::VectorXcd& x,
                             const Eigen::VectorXcd& y) {
  (void)w;
  // (E y)_i = y_i * sum_{j != i} |y_j|^2, so E never has to be formed.
  const double total = y.squaredNorm();
  Eigen::VectorXcd ey(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) ey(i) = y(i) * (total - std::norm(y(i)));
  return 4.0 * ey * x.adjoint();
}

Eigen::MatrixXcd gradient_j2(const Eigen::MatrixXcd& w, const Eigen::MatrixXcd& a) {
  Eigen::MatrixXcd c = w * a;
  c.diagonal().array() -= 1.0;
  return 2.0 * c * a.adjoint();
}

double energy_normalisation(const Eigen::VectorXcd& x) {
  const double e = x.squaredNorm();
  return 1.0 / (e * e);
}

std::size_t update(SeparationState& state, const SpectralFrame& x, const SpectralFrame& y,
                   const SteeringMatrix& a) {
  if (x.num_bins() != state.num_bins() || y.num_bins() != state.num_bins() || a.size() != state.num_bins())
    throw ConfigError("update: bin count mismatch");
  if (x.channels() != state.num_mics() || y.channels() != state.num_sources())
    throw ConfigError("update: channel count mismatch");
  if (state.num_sources() == 0 || state.mu() == 0.0) return 0;

  std::size_t adapted = 0;
  for (std::size_t k = 0; k < state.num_bins(); ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    const Eigen::VectorXcd xk = x.bins.col(col);
    if (xk.squaredNorm() < SeparationState::kMinBinEnergy) continue;
    const Eigen::VectorXcd yk = y.bins.col(col);
    auto& w = state.weights(k);
    if (a[k].rows() != w.cols() || a[k].cols() != w.rows()) throw ConfigError("update: steering shape mismatch");

    Eigen::MatrixXcd step = energy_normalisation(xk) * gradient_j1(w, xk, yk) + gradient_j2(w, a[k]);
    step *= state.mu();
    if (!step.allFinite()) continue;
    w -= step;
    ++adapted;
  }
  return adapted;
}

}  // namespace arraysep
