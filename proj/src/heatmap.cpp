#include "handgeo/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "handgeo/kernels.hpp"

namespace handgeo::heatmap {

namespace {

void validate_values(int width, int height, const std::vector<double>& v) {
  if (width < 8 || height < 8) {
    throw DimensionMismatch("heatmap dimensions must be >= 8, got " +
                            std::to_string(width) + "x" +
                            std::to_string(height));
  }
  if (v.size() != static_cast<std::size_t>(width) * height) {
    throw DimensionMismatch("heatmap value count does not match dimensions");
  }
  for (double x : v) {
    if (!std::isfinite(x) || x < 0.0) {
      throw Error("heatmap values must be finite and >= 0");
    }
  }
}

void require_same_dims(const HeatmapStack& a, const HeatmapStack& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw DimensionMismatch("heatmap stacks differ in dimensions");
  }
}

// Accumulates sum of squared differences and the 2*(pred-gt) gradient.
double stack_sq_loss(const HeatmapStack& pred, const HeatmapStack& gt,
                     StackGradient& grad) {
  require_same_dims(pred, gt);
  const std::size_t n = pred.map(0).size();
  grad.width = pred.width();
  grad.height = pred.height();
  grad.maps.assign(kNumJoints, std::vector<double>(n));
  double value = 0.0;
  for (int j = 0; j < kNumJoints; ++j) {
    const double* p = pred.map(j).data();
    const double* g = gt.map(j).data();
    value += kernels::sum_sq_diff(p, g, n);
    kernels::scaled_diff(grad.maps[j].data(), p, g, 2.0, n);
  }
  return value;
}

}  // namespace

Heatmap::Heatmap(int width, int height)
    : width_(width), height_(height),
      values_(static_cast<std::size_t>(width < 0 ? 0 : width) *
              (height < 0 ? 0 : height)) {
  validate_values(width, height, values_);
}

Heatmap::Heatmap(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  validate_values(width, height, values_);
}

HeatmapStack::HeatmapStack(std::vector<Heatmap> maps) : maps_(std::move(maps)) {
  if (maps_.size() != static_cast<std::size_t>(kNumJoints)) {
    throw DimensionMismatch("a stack holds exactly 21 heatmaps, got " +
                            std::to_string(maps_.size()));
  }
  for (const Heatmap& m : maps_) {
    if (m.width() != maps_.front().width() ||
        m.height() != maps_.front().height()) {
      throw DimensionMismatch("all maps in a stack must share dimensions");
    }
  }
}

HeatmapStack render_gaussian(
    const std::array<Vec2, kNumJoints>& keypoints2d,
    const std::array<bool, kNumJoints>& visibility, int width, int height,
    double sigma) {
  if (!(sigma > 0.0)) {
    throw NonPositiveSigma("sigma must be > 0, got " + std::to_string(sigma));
  }
  if (width < 8 || height < 8) {
    throw DimensionMismatch("heatmap dimensions must be >= 8");
  }
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  std::vector<Heatmap> maps;
  maps.reserve(kNumJoints);
  std::vector<double> row(width), col(height), grid;
  for (int j = 0; j < kNumJoints; ++j) {
    grid.assign(static_cast<std::size_t>(width) * height, 0.0);
    if (visibility[j]) {
      // Separable evaluation: exp(-(dx^2+dy^2)c) = exp(-dx^2 c) exp(-dy^2 c).
      const double cx = std::floor(keypoints2d[j].x());
      const double cy = std::floor(keypoints2d[j].y());
      for (int x = 0; x < width; ++x) {
        const double dx = x - cx;
        row[x] = std::exp(-dx * dx * inv2s2);
      }
      for (int y = 0; y < height; ++y) {
        const double dy = y - cy;
        col[y] = std::exp(-dy * dy * inv2s2);
      }
      kernels::outer_product(grid.data(), col.data(), height, row.data(),
                             width);
    }
    maps.emplace_back(width, height, grid);
  }
  return HeatmapStack(std::move(maps));
}

HeatmapStack render_gaussian(const HandPose& pose, int width, int height,
                             double sigma) {
  return render_gaussian(pose.joints2d, pose.visibility, width, height, sigma);
}

AttentionLossResult attention_loss(const HeatmapStack& pred_left,
                                   const HeatmapStack& pred_right,
                                   const HeatmapStack& gt_left,
                                   const HeatmapStack& gt_right) {
  AttentionLossResult result;
  result.value = stack_sq_loss(pred_left, gt_left, result.grad_left) +
                 stack_sq_loss(pred_right, gt_right, result.grad_right);
  return result;
}

HeatmapLossResult heatmap_2d_loss(const HeatmapStack& pred,
                                  const HeatmapStack& gt) {
  HeatmapLossResult result;
  result.value = stack_sq_loss(pred, gt, result.grad);
  return result;
}

double presence_score(const HeatmapStack& stack) {
  const std::size_t n = stack.map(0).size();
  std::vector<double> mean(n, 0.0);
  for (int j = 0; j < kNumJoints; ++j) {
    kernels::add_inplace(mean.data(), stack.map(j).data(), n);
  }
  const double inv_k = 1.0 / kNumJoints;
  for (double& v : mean) v *= inv_k;
  return kernels::max_value(mean.data(), n);
}

bool hand_present(const HeatmapStack& stack, double tau) {
  return presence_score(stack) >= tau;
}

SquareBox extract_box(const HeatmapStack& stack, double pad) {
  const int w = stack.width();
  const int h = stack.height();

  double min_x = std::numeric_limits<double>::infinity();
  double min_y = std::numeric_limits<double>::infinity();
  double max_x = -std::numeric_limits<double>::infinity();
  double max_y = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (int j = 0; j < kNumJoints; ++j) {
    const Heatmap& m = stack.map(j);
    // First row-major maximum of the map; all-zero maps carry no peak.
    double best = 0.0;
    int best_x = 0, best_y = 0;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double v = m.at(x, y);
        if (v > best) {
          best = v;
          best_x = x;
          best_y = y;
        }
      }
    }
    if (best > 0.0) {
      any = true;
      min_x = std::min(min_x, static_cast<double>(best_x));
      max_x = std::max(max_x, static_cast<double>(best_x));
      min_y = std::min(min_y, static_cast<double>(best_y));
      max_y = std::max(max_y, static_cast<double>(best_y));
    }
  }
  if (!any) {
    throw EmptyStack("cannot extract a box from an all-zero stack");
  }

  const double box_w = max_x - min_x;
  const double box_h = max_y - min_y;
  min_x -= pad * box_w;
  max_x += pad * box_w;
  min_y -= pad * box_h;
  max_y += pad * box_h;

  const double cx = 0.5 * (min_x + max_x);
  const double cy = 0.5 * (min_y + max_y);
  double side = std::max(max_x - min_x, max_y - min_y);
  side = std::max(side, kMinBoxSide);

  // Clamp: shrink only when the square cannot fit, otherwise shift it in.
  const double bound_x = w - 1.0;
  const double bound_y = h - 1.0;
  side = std::min(side, std::min(bound_x, bound_y));
  double x1 = std::clamp(cx - 0.5 * side, 0.0, bound_x - side);
  double y1 = std::clamp(cy - 0.5 * side, 0.0, bound_y - side);
  return SquareBox{x1, y1, x1 + side, y1 + side};
}

}  // namespace handgeo::heatmap
