#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "arraysep/geometry.h"
#include "arraysep/stft.h"

namespace arraysep {

// Per-bin demixing matrices W(k) (M x N) for a variable set of sources.
// Row m of every W(k) belongs to source_ids()[m].
class SeparationState {
 public:
  static constexpr double kDefaultMu = 0.01;
  // Bins whose input energy ||x(k)||^2 falls below this are not adapted.
  static constexpr double kMinBinEnergy = 1e-12;

  SeparationState(std::size_t num_bins, std::size_t num_mics, double mu = kDefaultMu);

  std::size_t num_bins() const { return weights_.size(); }
  std::size_t num_mics() const { return num_mics_; }
  std::size_t num_sources() const { return ids_.size(); }

  double mu() const { return mu_; }
  void set_mu(double mu) { mu_ = mu; }

  const std::vector<int>& source_ids() const { return ids_; }
  // Row index of a source id; throws ValidationError if absent.
  std::size_t row_of(int id) const;
  bool contains(int id) const;

  const Eigen::MatrixXcd& weights(std::size_t bin) const { return weights_[bin]; }
  Eigen::MatrixXcd& weights(std::size_t bin) { return weights_[bin]; }

  bool operator==(const SeparationState& other) const;

 private:
  friend void init_column(SeparationState&, const std::vector<Eigen::VectorXcd>&, int);
  friend void remove_source(SeparationState&, int);

  std::size_t num_mics_;
  double mu_;
  std::vector<int> ids_;
  std::vector<Eigen::MatrixXcd> weights_;
};

// y(k) = W(k) x(k) for every bin. x has N channels; the result has one
// channel per active source.
SpectralFrame separate(const SeparationState& state, const SpectralFrame& x);

// Appends a row for a new source initialised as a delay-and-sum beamformer
// towards it: w_{m,i}(k) = conj(a_{i,m}(k)) / N, which gives w_m . a_m = 1.
// steering[k] is the source's N-element steering vector at bin k. Existing
// rows are not touched.
void init_column(SeparationState& state, const std::vector<Eigen::VectorXcd>& steering, int id);

void add_source(SeparationState& state, const std::vector<Eigen::VectorXcd>& steering, int id);
void remove_source(SeparationState& state, int id);

// Off-diagonal part of the instantaneous output correlation, y y^H - diag(y y^H).
Eigen::MatrixXcd decorrelation_error(const Eigen::VectorXcd& y);

// Instantaneous costs for one bin: J1 = ||y y^H - diag(y y^H)||^2 with y = Wx,
// J2 = ||W A - I||^2. ||M||^2 is the sum of squared element magnitudes.
double cost_j1(const Eigen::MatrixXcd& w, const Eigen::VectorXcd& x);
double cost_j2(const Eigen::MatrixXcd& w, const Eigen::MatrixXcd& a);

// Gradients with respect to W*, in the convention dJ/dRe(W) + j dJ/dIm(W):
//   J1: 4 [E y] x^H with E = y y^H - diag(y y^H)
//   J2: 2 (W A - I) A^H
Eigen::MatrixXcd gradient_j1(const Eigen::MatrixXcd& w, const Eigen::VectorXcd& x,
                             const Eigen::VectorXcd& y);
Eigen::MatrixXcd gradient_j2(const Eigen::MatrixXcd& w, const Eigen::MatrixXcd& a);

// Energy normalisation (||x||^2)^-2.
double energy_normalisation(const Eigen::VectorXcd& x);

// One stochastic-gradient step per bin:
//   W <- W - mu [ (||x||^2)^-2 grad_J1 + grad_J2 ]
// a[k] must be N x M with columns ordered like state.source_ids(). Bins with
// negligible input energy, or whose step is not finite, are left unchanged.
// Returns the number of bins that were adapted.
std::size_t update(SeparationState& state, const SpectralFrame& x, const SpectralFrame& y,
                   const SteeringMatrix& a);

}  // namespace arraysep
