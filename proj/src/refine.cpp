#include "handgeo/refine.hpp"

#include <cmath>

namespace handgeo::refine {

namespace {

double mean_epe3d(const HandPose& a, const HandPose& b) {
  double sum = 0.0;
  for (int j = 0; j < kNumJoints; ++j) {
    sum += (a.joints3d[j] - b.joints3d[j]).norm();
  }
  return sum / kNumJoints;
}

struct Objective {
  double value;
  std::array<Vec3, kNumJoints> grad;
};

Objective evaluate(const HandPose& pose, const anatomy::AnatomyStats& stats,
                   const anatomy::LossConfig& cfg) {
  Objective obj{0.0, {}};
  if (cfg.beta_fr > 0.0) {
    const anatomy::PoseLossResult fr = anatomy::ratio_loss(pose, stats);
    obj.value += cfg.beta_fr * fr.value;
    for (int j = 0; j < kNumJoints; ++j) obj.grad[j] += cfg.beta_fr * fr.grad[j];
  }
  if (cfg.beta_ar > 0.0) {
    const anatomy::PoseLossResult ar = anatomy::angle_range_loss(pose, stats);
    obj.value += cfg.beta_ar * ar.value;
    for (int j = 0; j < kNumJoints; ++j) obj.grad[j] += cfg.beta_ar * ar.grad[j];
  }
  return obj;
}

}  // namespace

RefineResult refine_pose(const HandPose& init,
                         const anatomy::AnatomyStats& stats,
                         const anatomy::LossConfig& cfg,
                         const HandPose* ground_truth) {
  cfg.validate();
  stats.validate();

  constexpr double kMinStep = 1e-16;
  constexpr int kMaxLineSearchFailures = 20;

  RefineResult result;
  result.pose = init;

  Objective cur = evaluate(result.pose, stats, cfg);
  result.report.initial_loss = cur.value;
  if (ground_truth) {
    result.report.initial_epe = mean_epe3d(init, *ground_truth);
  }

  double trial = cfg.refine_step;
  int failures = 0;
  for (int it = 0; it < cfg.refine_max_iters; ++it) {
    // Freeze x, y unless full-3D refinement was requested.
    std::array<Vec3, kNumJoints> dir{};
    double g2 = 0.0;
    for (int j = 0; j < kNumJoints; ++j) {
      dir[j] = cfg.refine_full_3d ? cur.grad[j]
                                  : Vec3(0.0, 0.0, cur.grad[j].z());
      g2 += dir[j].squaredNorm();
    }
    if (g2 == 0.0) break;

    HandPose next = result.pose;
    Objective next_obj{};
    double t = trial;
    bool accepted = false;
    for (;;) {
      for (int j = 0; j < kNumJoints; ++j) {
        next.joints3d[j] = result.pose.joints3d[j] - t * dir[j];
      }
      next_obj = evaluate(next, stats, cfg);
      if (next_obj.value < cur.value) {
        accepted = true;
        break;
      }
      if (t <= kMinStep) break;
      t *= 0.5;
    }

    if (!accepted) {
      if (++failures >= kMaxLineSearchFailures) {
        throw DivergedLoss(
            "refinement cannot decrease the loss at the minimum step size");
      }
      continue;
    }
    failures = 0;

    const double improvement = cur.value - next_obj.value;
    result.pose = next;
    cur = next_obj;
    trial = std::min(t * 2.0, cfg.refine_step);
    result.report.trajectory.push_back(cur.value);
    result.report.iterations = it + 1;
    if (improvement < cfg.refine_tol) break;
  }

  result.report.final_loss = cur.value;
  if (ground_truth) {
    result.report.final_epe = mean_epe3d(result.pose, *ground_truth);
  }
  return result;
}

}  // namespace handgeo::refine
