#pragma once

// Target counting on a planar sensor grid: each target activates the sensors
// inside a disk, the sensor field counts overlapping activations, and the
// Euler integral recovers the number of targets exactly.  Under additive
// Gaussian sensor noise the count is re-estimated by subtracting the
// closed-form mean of the noise integral.

#include <cstdint>
#include <string>
#include <vector>

#include "eulab/covariance.hpp"
#include "eulab/grid.hpp"

namespace eulab {

struct Disk {
  double cx = 0.0;
  double cy = 0.0;
  double r = 0.0;
};

struct TargetScene {
  GridSpec domain;  // n = 2
  std::vector<Disk> disks;

  TargetScene() : domain(2, 1.0, 0.5) {}
  TargetScene(GridSpec d, std::vector<Disk> ds)
      : domain(std::move(d)), disks(std::move(ds)) {}
};

// Radius positive and every disk inside the domain with margin >= 2h.
void validate_scene(const TargetScene& scene);

TargetScene scene_from_json_text(const std::string& text);
TargetScene scene_from_json_file(const std::string& path);
std::string scene_to_json_text(const TargetScene& scene);

// Integer-valued sensor field: value at x = number of disks containing x.
FieldGrid rasterize_sensor_field(const TargetScene& scene);

// round(upper Euler integral) of the sensor field; refuses when the integral
// sits more than 0.25 from an integer (under-resolved rasterization).
int count_targets_exact(const FieldGrid& sensor);

struct NoisyEstimate {
  double integral = 0.0;             // Euler integral of sensor + noise
  double mean_correction = 0.0;      // closed-form mean of the noise integral
  double estimate = 0.0;             // integral - mean_correction
  double additivity_residual = 0.0;  // integral - (sensor alone) - (noise alone)
};

// One noisy-count estimate: additive Gaussian noise with the given seed and
// amplitude on the scene grid.  The amplitude scales the field; the mean
// correction scales with it.
NoisyEstimate estimate_targets_noisy(const FieldGrid& sensor,
                                     const CovarianceModel& model,
                                     std::uint64_t seed, double amplitude = 1.0);

// Random scene whose disk union is contractible: each disk either keeps a
// clear margin from all others or overlaps exactly one earlier disk with a
// wide lens, so unions are trees of convex pieces.  Deterministic in seed.
TargetScene random_scene(double m, double h, int max_disks, std::uint64_t seed);

}  // namespace eulab
