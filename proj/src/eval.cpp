#include "handgeo/eval.hpp"

#include <algorithm>
#include <cmath>

namespace handgeo::eval {

namespace {

std::vector<double> pooled_errors(const std::vector<HandPose>& pred,
                                  const std::vector<HandPose>& gt,
                                  Space space) {
  if (pred.size() != gt.size()) {
    throw CountMismatch("pred has " + std::to_string(pred.size()) +
                        " poses, gt has " + std::to_string(gt.size()));
  }
  std::vector<double> errors;
  errors.reserve(pred.size() * kNumJoints);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (int j = 0; j < kNumJoints; ++j) {
      if (space == Space::k3d) {
        errors.push_back((pred[i].joints3d[j] - gt[i].joints3d[j]).norm());
      } else {
        errors.push_back((pred[i].joints2d[j] - gt[i].joints2d[j]).norm());
      }
    }
  }
  return errors;
}

}  // namespace

EpeResult epe(const std::vector<HandPose>& pred,
              const std::vector<HandPose>& gt, Space space) {
  std::vector<double> errors = pooled_errors(pred, gt, space);
  if (errors.empty()) throw CountMismatch("no poses to evaluate");

  EpeResult out;
  double sum = 0.0;
  for (double e : errors) sum += e;
  out.mean = sum / static_cast<double>(errors.size());

  std::sort(errors.begin(), errors.end());
  const std::size_t n = errors.size();
  out.median = (n % 2 == 1) ? errors[n / 2]
                            : 0.5 * (errors[n / 2 - 1] + errors[n / 2]);
  return out;
}

std::vector<double> linspace_thresholds(double lo, double hi, int steps) {
  if (steps < 2 || !(hi > lo)) {
    throw BadThresholds("need >= 2 strictly increasing thresholds");
  }
  std::vector<double> t(steps);
  for (int i = 0; i < steps; ++i) {
    t[i] = lo + (hi - lo) * static_cast<double>(i) / (steps - 1);
  }
  return t;
}

PckAucResult pck_auc(const std::vector<HandPose>& pred,
                     const std::vector<HandPose>& gt,
                     const std::vector<double>& thresholds, Space space) {
  if (thresholds.size() < 2) {
    throw BadThresholds("need at least two thresholds");
  }
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > thresholds[i - 1])) {
      throw BadThresholds("thresholds must be strictly increasing");
    }
  }
  const std::vector<double> errors = pooled_errors(pred, gt, space);
  if (errors.empty()) throw CountMismatch("no poses to evaluate");

  PckAucResult out;
  out.curve.thresholds = thresholds;
  out.curve.values.reserve(thresholds.size());
  for (double t : thresholds) {
    std::size_t hit = 0;
    for (double e : errors) {
      if (e <= t) ++hit;
    }
    out.curve.values.push_back(static_cast<double>(hit) /
                               static_cast<double>(errors.size()));
  }

  // Exact area under the right-continuous PCK step function over the span:
  // each error contributes the measure of [max(err, lo), hi] where it counts.
  const double lo = thresholds.front();
  const double hi = thresholds.back();
  double area = 0.0;
  for (double e : errors) {
    area += std::max(0.0, hi - std::max(e, lo));
  }
  out.auc = area / (static_cast<double>(errors.size()) * (hi - lo));
  return out;
}

const std::string& joint_group_name(JointGroup group) {
  static const std::array<std::string, 5> names = {"palm", "mcp", "pip", "dip",
                                                   "tip"};
  return names[static_cast<int>(group)];
}

JointGroupErrors joint_group_errors(const std::vector<HandPose>& pred,
                                    const std::vector<HandPose>& gt) {
  if (pred.size() != gt.size()) {
    throw CountMismatch("pred has " + std::to_string(pred.size()) +
                        " poses, gt has " + std::to_string(gt.size()));
  }
  if (pred.empty()) throw CountMismatch("no poses to evaluate");

  JointGroupErrors out;
  std::array<std::array<double, 3>, 5> sums{};
  std::array<std::size_t, 5> counts{};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (int j = 0; j < kNumJoints; ++j) {
      // Wrist stands in for the palm center; others group by role row.
      const int group = (j == 0) ? 0 : ((j - 1) % 4) + 1;
      const Vec3 d = pred[i].joints3d[j] - gt[i].joints3d[j];
      for (int axis = 0; axis < 3; ++axis) {
        sums[group][axis] += std::abs(d[axis]);
      }
      ++counts[group];
    }
  }
  for (int g = 0; g < 5; ++g) {
    for (int axis = 0; axis < 3; ++axis) {
      out.mean_abs[g][axis] = sums[g][axis] / static_cast<double>(counts[g]);
    }
  }
  return out;
}

std::vector<HandPose> align_wrists(const std::vector<HandPose>& poses) {
  std::vector<HandPose> out = poses;
  for (HandPose& pose : out) {
    const Vec3 wrist = pose.joints3d[0];
    for (int j = 0; j < kNumJoints; ++j) pose.joints3d[j] -= wrist;
  }
  return out;
}

}  // namespace handgeo::eval
