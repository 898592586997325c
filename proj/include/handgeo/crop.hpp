#pragma once

#include <array>
#include <vector>

#include "handgeo/hand_model.hpp"
#include "handgeo/heatmap.hpp"

namespace handgeo::crop {

/// 2x3 affine parameter matrix [[a, b, tx], [c, d, ty]] mapping
/// (x, y) -> (a x + b y + tx, c x + d y + ty).
struct AffineParams {
  double a = 1.0, b = 0.0, tx = 0.0;
  double c = 0.0, d = 1.0, ty = 0.0;

  static AffineParams identity() { return {}; }

  Vec2 apply(const Vec2& p) const {
    return Vec2(a * p.x() + b * p.y() + tx, c * p.x() + d * p.y() + ty);
  }
};

/// The two transformed corners ((x1', y1'), (x2', y2')).
struct TransformedBox {
  Vec2 corner1;
  Vec2 corner2;
};

TransformedBox apply_affine(const AffineParams& theta,
                            const heatmap::SquareBox& box);

struct CropLossResult {
  double value = 0.0;
  // d(loss)/d{a, b, tx, c, d, ty}
  std::array<double, 6> grad{};
};

/// Squared L2 distance between T_theta(box) corners and the crop target
/// [0, 0, w-1, h-1], with the analytic gradient over all six parameters.
CropLossResult crop_loss(const AffineParams& theta,
                         const heatmap::SquareBox& box, int width, int height);

/// Closed-form axis-aligned scale+translation aligning the box exactly to
/// [0, 0, w-1, h-1]; crop_loss at the result is 0 to machine precision.
/// Throws DegenerateBox for non-positive box extent.
AffineParams solve_localizer(const heatmap::SquareBox& box, int width,
                             int height);

/// Applies T_theta to each keypoint.
std::array<Vec2, kNumJoints> crop_pose(
    const AffineParams& theta, const std::array<Vec2, kNumJoints>& pose2d);

/// Detector loss composition L_att + lambda * L_crop.
inline double detector_loss(double attention, double crop_value,
                            double lambda) {
  return attention + lambda * crop_value;
}

struct CropDescentReport {
  AffineParams theta;
  double final_loss = 0.0;
  int iterations = 0;
  std::vector<double> trajectory;  // loss after each accepted step
};

/// Gradient descent on crop_loss starting from the given theta (identity by
/// default). The descent runs in a box-normalized parameterization of the
/// same loss (corners mapped to +-1) with backtracking halving, so a single
/// step size covers all box scales. Stops when the loss drops below `tol` or
/// after `max_iters` accepted steps.
CropDescentReport descend_crop_loss(
    const heatmap::SquareBox& box, int width, int height, double step,
    int max_iters, double tol,
    const AffineParams& start = AffineParams::identity());

}  // namespace handgeo::crop
