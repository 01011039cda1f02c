#include "eulab/targets.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eulab/chaos.hpp"
#include "eulab/euler.hpp"
#include "eulab/fieldgen.hpp"
#include "eulab/rng.hpp"

namespace eulab {

namespace {

using nlohmann::json;

void require_keys(const json& obj, std::initializer_list<const char*> allowed,
                  const char* context) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) known = true;
    }
    if (!known) {
      throw ConfigError(std::string("scene: unknown key \"") + item.key() + "\" in " +
                        context);
    }
  }
}

// Uniform [0, 1) draws addressed by (seed, index); stateless.
struct UniformStream {
  Philox4x64::Key key;
  explicit UniformStream(std::uint64_t seed) : key{seed, 0x7363656E65ULL} {}
  double operator()(std::uint64_t i) const {
    const auto out = Philox4x64::block({i, 0, 0, 0}, key);
    return to_unit_interval(out[0]);
  }
};

}  // namespace

void validate_scene(const TargetScene& scene) {
  if (scene.domain.n != 2) throw ConfigError("scene: domain must be 2-dimensional");
  const double margin = 2.0 * scene.domain.h;
  for (const Disk& d : scene.disks) {
    if (!(d.r > 0.0)) throw ConfigError("scene: disk radius must be positive");
    if (d.cx - d.r < margin || d.cy - d.r < margin ||
        d.cx + d.r > scene.domain.m - margin || d.cy + d.r > scene.domain.m - margin) {
      std::ostringstream os;
      os << "scene: disk at (" << d.cx << ", " << d.cy << ") radius " << d.r
         << " violates the 2h boundary margin";
      throw ConfigError(os.str());
    }
  }
}

TargetScene scene_from_json_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scene: JSON parse failure: ") + e.what());
  }
  require_keys(root, {"domain", "disks"}, "scene");
  if (!root.contains("domain") || !root.contains("disks")) {
    throw ConfigError("scene: needs \"domain\" and \"disks\"");
  }
  const json& dom = root["domain"];
  require_keys(dom, {"m", "h"}, "domain");
  const GridSpec spec(2, dom.at("m").get<double>(), dom.at("h").get<double>());

  std::vector<Disk> disks;
  for (const json& d : root["disks"]) {
    require_keys(d, {"cx", "cy", "r"}, "disk");
    disks.push_back(
        {d.at("cx").get<double>(), d.at("cy").get<double>(), d.at("r").get<double>()});
  }
  TargetScene scene(spec, std::move(disks));
  validate_scene(scene);
  return scene;
}

TargetScene scene_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("scene: cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return scene_from_json_text(buffer.str());
}

std::string scene_to_json_text(const TargetScene& scene) {
  json root;
  root["domain"] = {{"m", scene.domain.m}, {"h", scene.domain.h}};
  root["disks"] = json::array();
  for (const Disk& d : scene.disks) {
    root["disks"].push_back({{"cx", d.cx}, {"cy", d.cy}, {"r", d.r}});
  }
  return root.dump(2);
}

FieldGrid rasterize_sensor_field(const TargetScene& scene) {
  validate_scene(scene);
  FieldGrid field(scene.domain);
  const int p = scene.domain.p;
  for (int ix = 0; ix < p; ++ix) {
    const double x = scene.domain.coord(ix);
    for (int iy = 0; iy < p; ++iy) {
      const double y = scene.domain.coord(iy);
      int count = 0;
      for (const Disk& d : scene.disks) {
        const double dx = x - d.cx;
        const double dy = y - d.cy;
        if (dx * dx + dy * dy <= d.r * d.r) ++count;
      }
      field.values[static_cast<std::int64_t>(ix) * p + iy] = count;
    }
  }
  return field;
}

int count_targets_exact(const FieldGrid& sensor) {
  const double value = upper_euler_integral(ec_curve(sensor));
  const long long nearest = std::llround(value);
  if (std::abs(value - static_cast<double>(nearest)) > 0.25) {
    std::ostringstream os;
    os << "count_targets_exact: integral " << value
       << " is not near an integer; refine the rasterization grid";
    throw NumericsError(os.str());
  }
  return static_cast<int>(nearest);
}

NoisyEstimate estimate_targets_noisy(const FieldGrid& sensor,
                                     const CovarianceModel& model,
                                     std::uint64_t seed, double amplitude) {
  if (model.dim() != 2) throw ConfigError("estimate_targets_noisy: model must be 2-d");

  const FieldGrid noise = sample_field(model, sensor.spec, seed);
  FieldGrid noisy(sensor.spec);
  FieldGrid noise_only(sensor.spec);
  for (std::size_t i = 0; i < sensor.values.size(); ++i) {
    noise_only.values[i] = amplitude * noise.values[i];
    noisy.values[i] = sensor.values[i] + noise_only.values[i];
  }

  NoisyEstimate out;
  out.integral = upper_euler_integral(ec_curve(noisy));
  // The upper integral is positively homogeneous, so the mean correction
  // scales linearly with the amplitude.
  out.mean_correction = amplitude * mean_euler_integral(model, sensor.spec.m).value;
  out.estimate = out.integral - out.mean_correction;
  out.additivity_residual = out.integral - upper_euler_integral(ec_curve(sensor)) -
                            upper_euler_integral(ec_curve(noise_only));
  return out;
}

TargetScene random_scene(double m, double h, int max_disks, std::uint64_t seed) {
  if (max_disks < 1) throw ConfigError("random_scene: max_disks must be positive");
  const UniformStream u(seed);
  std::uint64_t at = 0;
  const auto draw = [&] { return u(at++); };

  const double margin = 3.0 * h;
  const double r_min = 6.0 * h;
  const double r_max = std::min(m / 6.0, 24.0 * h);
  if (r_max <= r_min) throw ConfigError("random_scene: domain too small for disks");

  std::vector<Disk> disks;
  const int want = 1 + static_cast<int>(draw() * max_disks);

  const auto clear_of_others = [&](const Disk& d, int except) {
    for (int j = 0; j < static_cast<int>(disks.size()); ++j) {
      if (j == except) continue;
      const double dx = d.cx - disks[j].cx;
      const double dy = d.cy - disks[j].cy;
      const double dist = std::sqrt(dx * dx + dy * dy);
      if (dist < d.r + disks[j].r + margin) return false;
    }
    return true;
  };
  const auto inside = [&](const Disk& d) {
    const double edge = d.r + margin;
    return d.cx >= edge && d.cy >= edge && d.cx <= m - edge && d.cy <= m - edge;
  };

  for (int k = 0; k < want; ++k) {
    bool placed = false;
    for (int attempt = 0; attempt < 64 && !placed; ++attempt) {
      const double r = r_min + draw() * (r_max - r_min);
      Disk d{0.0, 0.0, r};
      const bool chain = !disks.empty() && draw() < 0.5;
      if (chain) {
        // Overlap exactly one earlier disk with a wide lens and no
        // containment, so the union stays a tree of convex pieces.
        const Disk& parent = disks[static_cast<int>(draw() * disks.size())];
        const double lo = std::abs(r - parent.r) + margin;
        const double hi = r + parent.r - margin;
        if (lo >= hi) continue;
        const double dist = lo + draw() * (hi - lo);
        const double angle = draw() * 6.28318530717958647692;
        d.cx = parent.cx + dist * std::cos(angle);
        d.cy = parent.cy + dist * std::sin(angle);
        const int parent_index = static_cast<int>(&parent - disks.data());
        if (inside(d) && clear_of_others(d, parent_index)) {
          disks.push_back(d);
          placed = true;
        }
      } else {
        d.cx = (r + margin) + draw() * (m - 2.0 * (r + margin));
        d.cy = (r + margin) + draw() * (m - 2.0 * (r + margin));
        if (clear_of_others(d, -1)) {
          disks.push_back(d);
          placed = true;
        }
      }
    }
  }
  if (disks.empty()) throw NumericsError("random_scene: placement failed");
  TargetScene scene(GridSpec(2, m, h), std::move(disks));
  validate_scene(scene);
  return scene;
}

}  // namespace eulab
