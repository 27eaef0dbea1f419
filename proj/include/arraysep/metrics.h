#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "arraysep/stft.h"
#include "arraysep/types.h"

namespace arraysep {

// Reported in place of +inf when the estimate matches the reference exactly.
inline constexpr double kSnrCapDb = 99.0;

// Integer lag maximising sum_n ref[n] est[n + lag] over |lag| <= max_lag.
long best_lag(const Signal& ref, const Signal& est, std::size_t max_lag);

// out[n] = est[n + lag], zero outside the input.
Signal shift_signal(const Signal& est, long lag);

struct Alignment {
  long lag = 0;
  double gain = 1.0;
};

// Best integer lag followed by the least-squares scale of the shifted estimate.
Alignment align(const Signal& ref, const Signal& est, std::size_t max_lag);

// 10 log10(sum s^2 / sum (s - g est[n + lag])^2) after align(); capped at
// kSnrCapDb. Throws ValidationError on length mismatch or a silent reference.
double snr_db(const Signal& ref, const Signal& est, std::size_t max_lag = 2048);

// Mean over frames of the RMS over bins of 10 log10((|S|^2 + eps) / (|S^|^2 + eps)),
// frames taken with the given STFT configuration.
double lsd_db(const Signal& ref, const Signal& est, const StftConfig& cfg, double epsilon);

// 1e-4 times the mean per-bin power of the reference's STFT.
double default_lsd_epsilon(const Signal& ref, const StftConfig& cfg);

struct MetricReport {
  std::string variant;
  std::vector<int> source_ids;
  std::vector<double> snr_db;
  std::vector<double> lsd_db;
};

}  // namespace arraysep
