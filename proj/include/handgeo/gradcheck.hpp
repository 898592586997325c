#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "handgeo/hand_model.hpp"

namespace handgeo::gradcheck {

struct CheckResult {
  std::string name;
  int trials = 0;
  int coords_checked = 0;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Central-difference validation of every analytic gradient in the library:
/// attention_loss, heatmap_2d_loss, crop_loss, ratio_loss, angle_range_loss,
/// smooth_l1_depth. Heatmap/crop gradients are held to 1e-6, pose-space
/// gradients to 1e-5; coordinates where both analytic and numeric gradients
/// are below 1e-8 are skipped. Deterministic for a fixed seed.
std::vector<CheckResult> run_suite(std::uint64_t seed, int trials_per_loss);

/// Deterministic uniform double in [0, 1) from raw 64-bit draws (stable
/// across standard libraries, unlike std::uniform_real_distribution).
double uniform01(std::uint64_t raw);

/// Generic non-planar pose for gradient checks: forward kinematics with
/// randomized parameters plus a +-2 mm jitter on every coordinate.
HandPose random_jittered_pose(std::uint64_t seed);

}  // namespace handgeo::gradcheck
