#pragma once

#include <optional>
#include <vector>

#include "handgeo/anatomy.hpp"
#include "handgeo/hand_model.hpp"

namespace handgeo::refine {

struct RefineReport {
  int iterations = 0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  // 3D EPE against the ground truth, when one was supplied.
  std::optional<double> initial_epe;
  std::optional<double> final_epe;
  std::vector<double> trajectory;  // loss after each accepted step
};

struct RefineResult {
  HandPose pose;
  RefineReport report;
};

/// Gradient descent on beta_fr * L_fr + beta_ar * L_ar over the pose depths
/// (x, y frozen; cfg.refine_full_3d unlocks all coordinates). Backtracking
/// halving keeps the recorded trajectory non-increasing; descent stops when
/// the loss improvement drops below cfg.refine_tol or cfg.refine_max_iters
/// is reached. Deterministic: identical inputs produce identical outputs.
/// Throws DivergedLoss if the line search fails 20 consecutive times at the
/// minimum step size.
RefineResult refine_pose(const HandPose& init,
                         const anatomy::AnatomyStats& stats,
                         const anatomy::LossConfig& cfg,
                         const HandPose* ground_truth = nullptr);

}  // namespace handgeo::refine
