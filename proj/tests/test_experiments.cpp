#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "eulab/covariance.hpp"
#include "eulab/errors.hpp"
#include "eulab/experiments.hpp"
#include "eulab/parallel.hpp"

using namespace eulab;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig config;
  config.n = 1;
  config.m_values = {4.0, 6.0};
  config.h = 0.1;
  config.replicates = 8;
  config.base_seed = 11;
  return config;
}

}  // namespace

TEST_CASE("configuration validation names each broken field") {
  ExperimentConfig config = tiny_config();
  validate_config(config);

  config.n = 4;
  CHECK_THROWS_AS(validate_config(config), ConfigError);
  config = tiny_config();
  config.replicates = 1;
  CHECK_THROWS_AS(validate_config(config), ConfigError);
  config = tiny_config();
  config.m_values = {};
  CHECK_THROWS_AS(validate_config(config), ConfigError);
  config = tiny_config();
  config.m_values = {6.0, 4.0};
  CHECK_THROWS_AS(validate_config(config), ConfigError);
  config = tiny_config();
  config.h = 0.0;
  CHECK_THROWS_AS(validate_config(config), ConfigError);
  config = tiny_config();
  config.truncation = 0;
  CHECK_THROWS_AS(validate_config(config), ConfigError);
}

TEST_CASE("a model-config dimension mismatch is refused") {
  const GaussianCovariance model(2, 1.0);
  CHECK_THROWS_AS(run_clt_experiment(model, tiny_config()), ConfigError);
}

TEST_CASE("replicated integrals are identical across thread counts") {
  const GaussianCovariance model(1, 1.0);
  ExperimentConfig serial = tiny_config();
  ExperimentConfig threaded = tiny_config();
  threaded.threads = 3;

  const CltReport a = run_clt_experiment(model, serial);
  const CltReport b = run_clt_experiment(model, threaded);
  REQUIRE(a.per_m.size() == b.per_m.size());
  for (std::size_t i = 0; i < a.per_m.size(); ++i) {
    REQUIRE(a.per_m[i].psi.size() == b.per_m[i].psi.size());
    for (std::size_t r = 0; r < a.per_m[i].psi.size(); ++r) {
      CHECK(std::bit_cast<std::uint64_t>(a.per_m[i].psi[r]) ==
            std::bit_cast<std::uint64_t>(b.per_m[i].psi[r]));
    }
    CHECK(a.per_m[i].stats.mean == b.per_m[i].stats.mean);
    CHECK(a.per_m[i].ks.statistic == b.per_m[i].ks.statistic);
  }
}

TEST_CASE("normalization centers by the closed-form mean and scales by root volume") {
  const GaussianCovariance model(1, 1.0);
  const CltReport report = run_clt_experiment(model, tiny_config());
  for (const MBlock& block : report.per_m) {
    CHECK(block.normalizer == doctest::Approx(std::sqrt(block.m)).epsilon(1e-14));
    CHECK(block.analytic_mean ==
          doctest::Approx(-block.m / std::sqrt(2 * 3.14159265358979324)).epsilon(1e-13));
    for (std::size_t r = 0; r < block.psi.size(); ++r) {
      CHECK(block.psi_normalized[r] ==
            doctest::Approx((block.psi[r] - block.analytic_mean) / block.normalizer)
                .epsilon(1e-14));
    }
    CHECK(block.stats.count == 8);
  }
}

TEST_CASE("the mean experiment decomposes by face dimension") {
  const GaussianCovariance model(1, 1.0);
  ExperimentConfig config;
  config.n = 1;
  config.m_values = {6.4};
  config.h = 0.1;
  config.replicates = 40;
  config.base_seed = 7;

  const MeanReport report = run_mean_experiment(model, config);
  REQUIRE(report.per_m.size() == 1);
  const MeanBlock& block = report.per_m[0];

  CHECK(block.analytic == doctest::Approx(-6.4 / std::sqrt(2 * 3.14159265358979324))
                              .epsilon(1e-13));
  CHECK(block.std_error > 0.0);
  CHECK(std::abs(block.mc_mean - block.analytic) < 6 * block.std_error);
  CHECK(block.morse_skipped <= 2);

  // In one dimension every discrete critical value sits on a vertex, so the
  // two representations coincide replicate by replicate.
  for (std::size_t r = 0; r < block.psi.size(); ++r) {
    if (!block.morse_ok[r]) continue;
    const double morse_total = block.face[0][r] + block.face[1][r];
    CHECK(morse_total == doctest::Approx(block.psi[r]).epsilon(1e-9));
  }

  // Endpoint contributions average to zero; the interval interior carries the
  // full mean.
  CHECK(std::abs(block.face_mean[0]) < 6 * block.face_std_error[0] + 1e-12);
  CHECK(std::abs(block.face_mean[1] - block.analytic) <
        6 * (block.face_std_error[1] + block.std_error));
}

TEST_CASE("the parallel loop propagates the first worker exception") {
  CHECK_THROWS_AS(parallel_for(16, 4,
                               [](int i) {
                                 if (i == 7) throw NumericsError("boom");
                               }),
                  NumericsError);
  // Serial path rethrows directly.
  CHECK_THROWS_AS(parallel_for(4, 1,
                               [](int i) {
                                 if (i == 2) throw ConfigError("bad");
                               }),
                  ConfigError);
}
