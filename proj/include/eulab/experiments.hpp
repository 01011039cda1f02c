#pragma once

// Monte-Carlo harness for the limit theorems: replicated Euler integrals of
// sampled fields, normalized against the analytic mean, with normality and
// moment summaries.  Reports are pure functions of the configuration; the
// replicate seed is derive_seed(base, bits(m), r).

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "eulab/covariance.hpp"
#include "eulab/stats.hpp"

namespace eulab {

struct ExperimentConfig {
  int n = 1;
  std::vector<double> m_values;  // strictly increasing
  double h = 0.1;
  int replicates = 0;  // >= 2
  std::uint64_t base_seed = 1;
  int truncation = 8;  // chaos order used by the variance comparison
  int threads = 1;
  double scale = 1.0;  // covariance correlation length
};

void validate_config(const ExperimentConfig& config);

// One grid size worth of replicated statistics.
struct MBlock {
  double m = 0.0;
  double analytic_mean = 0.0;             // closed-form E[Psi]
  double normalizer = 0.0;                // m^{n/2}
  std::vector<double> psi;                // raw upper Euler integrals
  std::vector<double> psi_normalized;     // (psi - analytic_mean) / normalizer
  SummaryStats stats;                     // of psi_normalized
  KsResult ks;                            // vs N(0, sample variance)
};

struct CltReport {
  ExperimentConfig config;
  std::vector<MBlock> per_m;
};

// Sample R fields per m, integrate, normalize, summarize.  Deterministic in
// the configuration; replicate errors carry (m, r) context.
CltReport run_clt_experiment(const CovarianceModel& model,
                             const ExperimentConfig& config);

// Mean decomposition by face dimension: slot k holds the Monte-Carlo mean of
// the Morse sum restricted to k-dimensional faces (0 = corners, n = interior).
struct MeanBlock {
  double m = 0.0;
  double mc_mean = 0.0;  // mean of the upper Euler integrals
  double std_error = 0.0;
  double analytic = 0.0;
  std::array<double, 4> face_mean{};       // Morse-sum means by face dimension
  std::array<double, 4> face_std_error{};
  int morse_skipped = 0;  // replicates whose Morse classification was degenerate
  std::vector<double> psi;                 // per-replicate upper Euler integrals
  std::array<std::vector<double>, 4> face;  // per-replicate Morse sums by face dim
  std::vector<char> morse_ok;              // 0 where the classification refused
};

struct MeanReport {
  ExperimentConfig config;
  std::vector<MeanBlock> per_m;
};

// Replicated mean of the Euler integral against the closed form, with the
// per-face Morse decomposition exhibiting that only edge families contribute.
// Requires an isotropic model.
MeanReport run_mean_experiment(const CovarianceModel& model,
                               const ExperimentConfig& config);

}  // namespace eulab
