#include "handgeo/crop.hpp"

#include <array>
#include <cmath>

namespace handgeo::crop {

namespace {

// Residuals of T_theta(box) against the crop target [0, 0, w-1, h-1],
// ordered [x1', y1', x2' - (w-1), y2' - (h-1)].
std::array<double, 4> residuals(const AffineParams& theta,
                                const heatmap::SquareBox& box, int width,
                                int height) {
  const TransformedBox t = apply_affine(theta, box);
  return {t.corner1.x(), t.corner1.y(), t.corner2.x() - (width - 1.0),
          t.corner2.y() - (height - 1.0)};
}

}  // namespace

TransformedBox apply_affine(const AffineParams& theta,
                            const heatmap::SquareBox& box) {
  return TransformedBox{theta.apply(Vec2(box.x1, box.y1)),
                        theta.apply(Vec2(box.x2, box.y2))};
}

CropLossResult crop_loss(const AffineParams& theta,
                         const heatmap::SquareBox& box, int width,
                         int height) {
  const auto r = residuals(theta, box, width, height);
  CropLossResult out;
  out.value = r[0] * r[0] + r[1] * r[1] + r[2] * r[2] + r[3] * r[3];
  out.grad[0] = 2.0 * (r[0] * box.x1 + r[2] * box.x2);  // a
  out.grad[1] = 2.0 * (r[0] * box.y1 + r[2] * box.y2);  // b
  out.grad[2] = 2.0 * (r[0] + r[2]);                    // tx
  out.grad[3] = 2.0 * (r[1] * box.x1 + r[3] * box.x2);  // c
  out.grad[4] = 2.0 * (r[1] * box.y1 + r[3] * box.y2);  // d
  out.grad[5] = 2.0 * (r[1] + r[3]);                    // ty
  return out;
}

AffineParams solve_localizer(const heatmap::SquareBox& box, int width,
                             int height) {
  const double dx = box.x2 - box.x1;
  const double dy = box.y2 - box.y1;
  if (!(dx > 1e-12) || !(dy > 1e-12)) {
    throw DegenerateBox("box extent must be positive");
  }
  AffineParams theta;
  theta.a = (width - 1.0) / dx;
  theta.d = (height - 1.0) / dy;
  theta.b = theta.c = 0.0;
  theta.tx = -theta.a * box.x1;
  theta.ty = -theta.d * box.y1;
  return theta;
}

std::array<Vec2, kNumJoints> crop_pose(
    const AffineParams& theta, const std::array<Vec2, kNumJoints>& pose2d) {
  std::array<Vec2, kNumJoints> out;
  for (int j = 0; j < kNumJoints; ++j) {
    out[j] = theta.apply(pose2d[j]);
  }
  return out;
}

CropDescentReport descend_crop_loss(const heatmap::SquareBox& box, int width,
                                    int height, double step, int max_iters,
                                    double tol, const AffineParams& start) {
  // Reparameterize over the unit box: with N(p) = ((p - c) / r), descend on
  // theta' where theta = theta' o N. Corners map to (-1,-1) and (+1,+1), so
  // the quadratic is well-conditioned regardless of box scale.
  const double cx = 0.5 * (box.x1 + box.x2);
  const double cy = 0.5 * (box.y1 + box.y2);
  const double r = 0.5 * (box.x2 - box.x1);
  if (!(r > 1e-12)) {
    throw DegenerateBox("box extent must be positive");
  }
  const heatmap::SquareBox unit{-1.0, -1.0, 1.0, 1.0};

  // theta' = theta o N^{-1}, N^{-1}(xi) = c + r xi.
  AffineParams p;
  p.a = start.a * r;
  p.b = start.b * r;
  p.tx = start.a * cx + start.b * cy + start.tx;
  p.c = start.c * r;
  p.d = start.d * r;
  p.ty = start.c * cx + start.d * cy + start.ty;

  const auto to_original = [&](const AffineParams& q) {
    AffineParams t;
    t.a = q.a / r;
    t.b = q.b / r;
    t.tx = q.tx - (q.a * cx + q.b * cy) / r;
    t.c = q.c / r;
    t.d = q.d / r;
    t.ty = q.ty - (q.c * cx + q.d * cy) / r;
    return t;
  };

  CropDescentReport report;
  CropLossResult cur = crop_loss(p, unit, width, height);
  double trial = step;
  for (int it = 0; it < max_iters && cur.value >= tol; ++it) {
    const auto& g = cur.grad;
    const double g2 = g[0] * g[0] + g[1] * g[1] + g[2] * g[2] + g[3] * g[3] +
                      g[4] * g[4] + g[5] * g[5];
    if (g2 == 0.0) break;

    AffineParams next;
    CropLossResult next_loss;
    double t = trial;
    for (;; t *= 0.5) {
      next = p;
      next.a -= t * g[0];
      next.b -= t * g[1];
      next.tx -= t * g[2];
      next.c -= t * g[3];
      next.d -= t * g[4];
      next.ty -= t * g[5];
      next_loss = crop_loss(next, unit, width, height);
      if (next_loss.value <= cur.value - 1e-4 * t * g2) break;
      if (t < 1e-18) break;
    }
    if (next_loss.value >= cur.value) break;
    p = next;
    cur = next_loss;
    trial = std::min(t * 2.0, step);
    report.trajectory.push_back(cur.value);
    report.iterations = it + 1;
  }

  report.theta = to_original(p);
  report.final_loss = cur.value;
  return report;
}

}  // namespace handgeo::crop
