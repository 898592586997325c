#pragma once

#include <array>
#include <string>
#include <vector>

#include "handgeo/hand_model.hpp"

namespace handgeo::eval {

enum class Space { k2d, k3d };

struct EpeResult {
  double mean = 0.0;
  double median = 0.0;
};

/// Per-joint Euclidean distances pooled over all samples; mean and median of
/// the pool (pixels for 2D, millimeters for 3D). Throws CountMismatch.
EpeResult epe(const std::vector<HandPose>& pred,
              const std::vector<HandPose>& gt, Space space);

struct PckCurve {
  std::vector<double> thresholds;  // strictly increasing
  std::vector<double> values;      // fraction of pooled joints with err <= t
};

struct PckAucResult {
  PckCurve curve;
  double auc = 0.0;
};

/// PCK over the given thresholds plus the exact area under the PCK step
/// function across the threshold span, normalized to [0, 1]. Thresholds must
/// be strictly increasing with at least two entries (BadThresholds).
PckAucResult pck_auc(const std::vector<HandPose>& pred,
                     const std::vector<HandPose>& gt,
                     const std::vector<double>& thresholds, Space space);

/// Evenly spaced thresholds, lo..hi inclusive.
std::vector<double> linspace_thresholds(double lo, double hi, int steps);

enum class JointGroup : int { kPalm = 0, kMcpRow, kPipRow, kDipRow, kTipRow };

const std::string& joint_group_name(JointGroup group);

/// Mean absolute per-axis 3D errors within each joint group (PALM = wrist;
/// each other row pools its five per-finger joints).
struct JointGroupErrors {
  // [group][axis], axis 0=X 1=Y 2=Z
  std::array<std::array<double, 3>, 5> mean_abs{};
};

JointGroupErrors joint_group_errors(const std::vector<HandPose>& pred,
                                    const std::vector<HandPose>& gt);

/// Translate every pose so its wrist sits at the origin (optional alignment
/// before 3D metrics).
std::vector<HandPose> align_wrists(const std::vector<HandPose>& poses);

}  // namespace handgeo::eval
