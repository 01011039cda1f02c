#include "eulab/fieldgen.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "eulab/rng.hpp"

namespace eulab {

namespace {

struct FftwBuffer {
  fftw_complex* data = nullptr;
  explicit FftwBuffer(std::int64_t count) {
    data = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * count));
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
};

// Torus covariance spectrum for per-axis size N; empty result if the
// embedding is not nonnegative definite within the clip tolerance.
bool torus_spectrum(const CovarianceModel& model, const GridSpec& spec, int N,
                    std::vector<double>& spectrum) {
  const int n = spec.n;
  std::int64_t total = 1;
  for (int d = 0; d < n; ++d) total *= N;

  FftwBuffer buf(total);
  int dims[3] = {N, N, N};
  fftw_plan plan = fftw_plan_dft(n, dims, buf.data, buf.data, FFTW_FORWARD, FFTW_ESTIMATE);

  std::vector<double> lag(n, 0.0);
  std::array<int, 3> idx{0, 0, 0};
  for (std::int64_t f = 0; f < total; ++f) {
    for (int d = 0; d < n; ++d) {
      const int k = idx[d];
      lag[d] = std::min(k, N - k) * spec.h;
    }
    buf.data[f][0] = model(lag);
    buf.data[f][1] = 0.0;
    for (int d = n - 1; d >= 0; --d) {
      if (++idx[d] < N) break;
      idx[d] = 0;
    }
  }

  fftw_execute(plan);
  fftw_destroy_plan(plan);

  spectrum.resize(total);
  bool ok = true;
  for (std::int64_t f = 0; f < total; ++f) {
    double ev = buf.data[f][0];
    if (ev < -1e-9) ok = false;
    spectrum[f] = std::max(ev, 0.0);
  }
  return ok;
}

}  // namespace

FieldGrid sample_field(const CovarianceModel& model, const GridSpec& spec,
                       std::uint64_t seed) {
  if (model.dim() != spec.n) {
    throw ConfigError("sample_field: model dimension does not match the grid");
  }
  const int n = spec.n;
  const int p = spec.p;

  std::vector<double> spectrum;
  int N = 0;
  bool ok = false;
  for (int doubling = 0; doubling <= 3 && !ok; ++doubling) {
    N = 2 * (p - 1) << doubling;
    ok = torus_spectrum(model, spec, N, spectrum);
  }
  if (!ok) {
    std::ostringstream os;
    os << "sample_field: embedding spectrum stays below -1e-9 after 3 torus doublings "
       << "(model " << model.describe() << ", h=" << spec.h << ")";
    throw NumericsError(os.str());
  }

  std::int64_t total = 1;
  for (int d = 0; d < n; ++d) total *= N;

  FftwBuffer buf(total);
  int dims[3] = {N, N, N};
  fftw_plan plan = fftw_plan_dft(n, dims, buf.data, buf.data, FFTW_BACKWARD, FFTW_ESTIMATE);

  // Independent complex white noise per torus site, scaled by the spectrum.
  // The real part of the unnormalized inverse transform then has exactly the
  // wrapped covariance.
  const Philox4x64::Key key{seed, kStreamField};
  const double inv_total = 1.0 / static_cast<double>(total);
  for (std::int64_t f = 0; f < total; ++f) {
    const auto z = normal_pair(key, {static_cast<std::uint64_t>(f), 0, 0, 0});
    const double amp = std::sqrt(spectrum[f] * inv_total);
    buf.data[f][0] = amp * z[0];
    buf.data[f][1] = amp * z[1];
  }

  fftw_execute(plan);
  fftw_destroy_plan(plan);

  FieldGrid field(spec);
  field.seed = seed;
  std::int64_t torus_stride[3] = {0, 0, 0};
  torus_stride[n - 1] = 1;
  for (int d = n - 2; d >= 0; --d) torus_stride[d] = torus_stride[d + 1] * N;

  std::array<int, 3> idx{0, 0, 0};
  const std::int64_t count = spec.vertex_count();
  for (std::int64_t f = 0; f < count; ++f) {
    std::int64_t src = 0;
    for (int d = 0; d < n; ++d) src += idx[d] * torus_stride[d];
    field.values[f] = buf.data[src][0];
    for (int d = n - 1; d >= 0; --d) {
      if (++idx[d] < p) break;
      idx[d] = 0;
    }
  }
  return field;
}

SampleDiagnostics validate_sample(const FieldGrid& field, const CovarianceModel& model) {
  const int n = field.spec.n;
  const int p = field.spec.p;
  const std::int64_t count = field.spec.vertex_count();

  SampleDiagnostics diag;
  double sum = 0.0, sum2 = 0.0;
  for (double v : field.values) {
    sum += v;
    sum2 += v * v;
  }
  diag.mean = sum / count;
  diag.variance = sum2 / count - diag.mean * diag.mean;

  std::int64_t stride[3] = {0, 0, 0};
  stride[n - 1] = 1;
  for (int d = n - 2; d >= 0; --d) stride[d] = stride[d + 1] * p;

  std::vector<double> lag(n, 0.0);
  for (int k = 1; k <= 3 && k < p; ++k) {
    double acc = 0.0;
    std::int64_t pairs = 0;
    std::array<int, 3> idx{0, 0, 0};
    for (std::int64_t f = 0; f < count; ++f) {
      if (idx[0] + k < p) {
        acc += field.values[f] * field.values[f + k * stride[0]];
        ++pairs;
      }
      for (int d = n - 1; d >= 0; --d) {
        if (++idx[d] < p) break;
        idx[d] = 0;
      }
    }
    diag.lag_corr.push_back(acc / pairs);
    lag[0] = k * field.spec.h;
    diag.lag_corr_model.push_back(model(lag));
  }

  // Effective patch count: roughly one independent patch per unit length per
  // axis; the band is a loose sanity guard, not a sharp test.
  double patches = 1.0;
  for (int d = 0; d < n; ++d) patches *= std::max(1.0, field.spec.m);
  diag.tolerance = 6.0 / std::sqrt(patches);
  std::fill(lag.begin(), lag.end(), 0.0);
  const double var_model = model(lag);
  diag.mean_ok = std::abs(diag.mean) < diag.tolerance;
  diag.variance_ok = std::abs(diag.variance - var_model) < 2.0 * diag.tolerance;
  diag.corr_ok = true;
  for (std::size_t i = 0; i < diag.lag_corr.size(); ++i) {
    if (std::abs(diag.lag_corr[i] - diag.lag_corr_model[i]) > 2.0 * diag.tolerance) {
      diag.corr_ok = false;
    }
  }
  return diag;
}

}  // namespace eulab
