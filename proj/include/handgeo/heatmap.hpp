#pragma once

#include <vector>

#include "handgeo/hand_model.hpp"

namespace handgeo::heatmap {

/// Per-joint 2D response grid, row-major, values finite and >= 0.
class Heatmap {
 public:
  Heatmap(int width, int height);
  Heatmap(int width, int height, std::vector<double> values);

  int width() const { return width_; }
  int height() const { return height_; }
  double at(int x, int y) const { return values_[y * width_ + x]; }
  const std::vector<double>& values() const { return values_; }
  const double* data() const { return values_.data(); }
  std::size_t size() const { return values_.size(); }

 private:
  int width_;
  int height_;
  std::vector<double> values_;
};

/// 21 heatmaps of identical dimensions, one per joint.
class HeatmapStack {
 public:
  explicit HeatmapStack(std::vector<Heatmap> maps);

  int width() const { return maps_.front().width(); }
  int height() const { return maps_.front().height(); }
  const Heatmap& map(int joint) const { return maps_[joint]; }
  const std::vector<Heatmap>& maps() const { return maps_; }

 private:
  std::vector<Heatmap> maps_;
};

/// Perfect square box, continuous pixel coordinates: x2-x1 == y2-y1 > 0.
struct SquareBox {
  double x1, y1, x2, y2;
  double side() const { return x2 - x1; }
};

/// Loss gradient with respect to one stack of predicted maps (values may be
/// negative, hence not a HeatmapStack).
struct StackGradient {
  int width = 0;
  int height = 0;
  std::vector<std::vector<double>> maps;  // K grids, row-major
};

/// Unit-peak Gaussian per joint, centered at the truncated keypoint pixel:
/// value(x,y) = exp(-((x-floor(u))^2 + (y-floor(v))^2) / (2 sigma^2)).
/// Invisible joints render all-zero maps. Throws NonPositiveSigma.
HeatmapStack render_gaussian(
    const std::array<Vec2, kNumJoints>& keypoints2d,
    const std::array<bool, kNumJoints>& visibility, int width, int height,
    double sigma);

/// Convenience overload reading keypoints and visibility from the pose.
HeatmapStack render_gaussian(const HandPose& pose, int width, int height,
                             double sigma);

struct AttentionLossResult {
  double value = 0.0;
  StackGradient grad_left;
  StackGradient grad_right;
};

/// Sum over joints of squared Frobenius distances, left + right hand (N=1;
/// batch averaging is the caller's job). Gradient is 2(pred - gt) per map.
AttentionLossResult attention_loss(const HeatmapStack& pred_left,
                                   const HeatmapStack& pred_right,
                                   const HeatmapStack& gt_left,
                                   const HeatmapStack& gt_right);

struct HeatmapLossResult {
  double value = 0.0;
  StackGradient grad;
};

/// Single-hand heatmap regression loss: sum over joints of ||S - S~||^2_F.
HeatmapLossResult heatmap_2d_loss(const HeatmapStack& pred,
                                  const HeatmapStack& gt);

/// Maximum over pixels of the mean-over-joints map.
double presence_score(const HeatmapStack& stack);

/// Presence decision: presence_score(stack) >= tau.
bool hand_present(const HeatmapStack& stack, double tau);

/// Tight bounding box of per-map argmax locations (all-zero maps skipped),
/// expanded by `pad` (fraction of each dimension) per side, squared to
/// max(width, height) about the same center, then clamped to the image
/// bounds [0, w-1] x [0, h-1] by shifting first and shrinking only if the
/// side exceeds the image. Degenerate zero-area boxes expand to a 9-px
/// minimum side centered on the peak. Throws EmptyStack if every map is 0.
SquareBox extract_box(const HeatmapStack& stack, double pad);

inline constexpr double kMinBoxSide = 9.0;

}  // namespace handgeo::heatmap
