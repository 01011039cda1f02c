#include "eulab/experiments.hpp"

#include <bit>
#include <cmath>
#include <sstream>

#include "eulab/chaos.hpp"
#include "eulab/errors.hpp"
#include "eulab/euler.hpp"
#include "eulab/fieldgen.hpp"
#include "eulab/parallel.hpp"
#include "eulab/rng.hpp"

namespace eulab {

namespace {

std::uint64_t replicate_seed(std::uint64_t base, double m, int r) {
  return derive_seed(base, std::bit_cast<std::uint64_t>(m),
                     static_cast<std::uint64_t>(r));
}

[[noreturn]] void rethrow_with_context(const std::exception& e, double m, int r) {
  std::ostringstream os;
  os << "replicate (m=" << m << ", r=" << r << "): " << e.what();
  throw NumericsError(os.str());
}

double mean_of(std::span<const double> v) {
  return pairwise_sum(v) / static_cast<double>(v.size());
}

double std_error_of(std::span<const double> v) {
  const double mu = mean_of(v);
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = v[i] - mu;
    sq[i] = d * d;
  }
  const double var = pairwise_sum(sq) / (v.size() - 1.0);
  return std::sqrt(var / static_cast<double>(v.size()));
}

}  // namespace

void validate_config(const ExperimentConfig& config) {
  if (config.n < 1 || config.n > 3) throw ConfigError("config: n must be 1, 2, or 3");
  if (config.replicates < 2) throw ConfigError("config: need at least 2 replicates");
  if (config.m_values.empty()) throw ConfigError("config: no m values");
  for (std::size_t i = 0; i + 1 < config.m_values.size(); ++i) {
    if (!(config.m_values[i] < config.m_values[i + 1])) {
      throw ConfigError("config: m values must be strictly increasing");
    }
  }
  if (!(config.h > 0.0)) throw ConfigError("config: h must be positive");
  if (config.truncation < 1) throw ConfigError("config: truncation must be >= 1");
}

CltReport run_clt_experiment(const CovarianceModel& model,
                             const ExperimentConfig& config) {
  validate_config(config);
  if (model.dim() != config.n) throw ConfigError("config: model dimension mismatch");

  CltReport report;
  report.config = config;

  for (const double m : config.m_values) {
    MBlock block;
    block.m = m;
    block.analytic_mean = mean_euler_integral(model, m).value;
    block.normalizer = std::pow(m, 0.5 * config.n);
    block.psi.resize(config.replicates);
    block.psi_normalized.resize(config.replicates);

    const GridSpec spec(config.n, m, config.h);
    parallel_for(config.replicates, config.threads, [&](int r) {
      try {
        const FieldGrid field =
            sample_field(model, spec, replicate_seed(config.base_seed, m, r));
        block.psi[r] = upper_euler_integral(ec_curve(field));
      } catch (const std::exception& e) {
        rethrow_with_context(e, m, r);
      }
    });
    for (int r = 0; r < config.replicates; ++r) {
      block.psi_normalized[r] = (block.psi[r] - block.analytic_mean) / block.normalizer;
    }

    block.stats = summary_stats(block.psi_normalized);
    block.ks = ks_test_normal(block.psi_normalized, 0.0, std::sqrt(block.stats.variance));
    report.per_m.push_back(std::move(block));
  }
  return report;
}

MeanReport run_mean_experiment(const CovarianceModel& model,
                               const ExperimentConfig& config) {
  validate_config(config);
  if (model.dim() != config.n) throw ConfigError("config: model dimension mismatch");
  if (!model.isotropic()) {
    throw ConfigError("run_mean_experiment: requires an isotropic model");
  }

  MeanReport report;
  report.config = config;

  for (const double m : config.m_values) {
    MeanBlock block;
    block.m = m;
    block.analytic = mean_euler_integral(model, m).value;

    const int R = config.replicates;
    block.psi.resize(R);
    for (auto& f : block.face) f.assign(R, 0.0);
    block.morse_ok.assign(R, 1);

    const GridSpec spec(config.n, m, config.h);
    parallel_for(R, config.threads, [&](int r) {
      try {
        const FieldGrid grid =
            sample_field(model, spec, replicate_seed(config.base_seed, m, r));
        block.psi[r] = upper_euler_integral(ec_curve(grid));
        try {
          const MorseDecomposition morse = morse_euler_integral(grid);
          for (int k = 0; k < 4; ++k) block.face[k][r] = morse.by_face_dim[k];
        } catch (const DegeneracyError&) {
          block.morse_ok[r] = 0;
        }
      } catch (const std::exception& e) {
        rethrow_with_context(e, m, r);
      }
    });

    block.mc_mean = mean_of(block.psi);
    block.std_error = std_error_of(block.psi);

    std::array<std::vector<double>, 4> kept;
    for (int r = 0; r < R; ++r) {
      if (!block.morse_ok[r]) {
        ++block.morse_skipped;
        continue;
      }
      for (int k = 0; k < 4; ++k) kept[k].push_back(block.face[k][r]);
    }
    for (int k = 0; k < 4; ++k) {
      if (kept[k].size() >= 2) {
        block.face_mean[k] = mean_of(kept[k]);
        block.face_std_error[k] = std_error_of(kept[k]);
      }
    }
    report.per_m.push_back(std::move(block));
  }
  return report;
}

}  // namespace eulab
