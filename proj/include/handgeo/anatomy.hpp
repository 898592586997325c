#pragma once

#include <array>
#include <vector>

#include "handgeo/hand_model.hpp"
#include "handgeo/heatmap.hpp"

namespace handgeo::anatomy {

enum class AngleKind : int { kProxMid = 0, kMidDist, kAbduction };

/// One constrained angle. For ABDUCTION, `finger` names the first of the
/// adjacent pair (thumb..ring).
struct AngleId {
  AngleKind kind;
  Finger finger;

  bool operator==(const AngleId&) const = default;
};

/// The 14 constrained angles: PROX_MID and MID_DIST for all five fingers,
/// ABDUCTION for the four adjacent proximal pairs.
const std::vector<AngleId>& all_angle_ids();

std::string angle_kind_name(AngleKind kind);
AngleKind angle_kind_from_name(const std::string& name);

struct AngleRange {
  AngleId id;
  double min_deg;
  double max_deg;
};

/// Corpus statistics consumed by the constraint losses.
struct AnatomyStats {
  double mean_ratio = 1.0;       // R-bar
  double ratio_variance = 0.0;   // population variance
  std::vector<AngleRange> angle_ranges;
  // Mean finger lengths rescaled so the middle finger is exactly 10.
  std::array<double, kNumFingers> per_finger_mean_lengths{};

  const AngleRange& range(const AngleId& id) const;
  void validate() const;
};

enum class DepthLossMode {
  kPerJointHuber,       // Huber on each raw depth residual, summed
  kLiteralSquaredNorm,  // Huber applied to the squared L2 norm of residuals
};

/// Every tunable the losses and the refiner consume.
struct LossConfig {
  double lambda = 1.0;        // L_det = L_att + lambda * L_crop
  double lambda_reg = 1.0;    // weight of the plain depth regression term
  double lambda_geo = 1.0;    // weight of the geometric term in the base loss
  double beta_fr = 1.0;       // finger-ratio constraint weight
  double beta_ar = 1.0;       // angle-range constraint weight
  double delta_mm = 1.0;      // Huber threshold
  double sigma_px = 2.0;      // heatmap Gaussian sigma
  double tau = 0.25;          // presence threshold
  DepthLossMode depth_mode = DepthLossMode::kPerJointHuber;

  double refine_step = 1e-2;
  int refine_max_iters = 2000;
  double refine_tol = 1e-9;
  bool refine_full_3d = false;

  double crop_step = 0.15;
  int crop_max_iters = 2000;

  void validate() const;  // throws Error on out-of-range values
};

/// Sum of the three digit lengths of the finger (Euclidean, mm).
double finger_length(const HandPose& pose, Finger finger);

/// Average over the 10 ordered finger pairs (thumb..little) of the ratio
/// (sum of later finger lengths) / (this finger length). Equal-length hands
/// give exactly 1. Throws ZeroLengthFinger.
double mean_ratio(const HandPose& pose);

struct PoseLossResult {
  double value = 0.0;
  std::array<Vec3, kNumJoints> grad{};  // d(value)/d(joints3d), per joint
};

/// ||R-hat - R-bar||^2 with the analytic gradient through the digit norms.
PoseLossResult ratio_loss(const HandPose& pose, const AnatomyStats& stats);

/// Unit normal orienting the angle measurement toward the palm interior.
/// PROX_MID of finger n builds it from (MCP_n, MCP_{n+1}, PIP_n); the little
/// finger substitutes the index MCP with reversed order; MID_DIST uses
/// (MCP_n, PIP_n, DIP_n); ABDUCTION uses the palm plane from
/// (WRIST, INDEX_MCP, LITTLE_MCP). Throws CollinearJoints.
Vec3 inward_normal(const HandPose& pose, const AngleId& id);

/// Signed angle from u to v about the axis n, in degrees mapped to [0, 360):
/// atan2((u x v) . n, u . v).
double signed_angle_deg(const Vec3& u, const Vec3& v, const Vec3& n);

/// Directional angle between the two digits of `id`, degrees in [0, 360).
/// A straight chain gives 0; bends toward the palm grow past 0; bends away
/// land in (180, 360). Throws ZeroLengthDigit / CollinearJoints.
double digit_angle(const HandPose& pose, const AngleId& id);

/// Quadratic hinge outside [min, max] per angle, summed (deg^2), with the
/// analytic gradient through the atan2 and normal construction.
PoseLossResult angle_range_loss(const HandPose& pose,
                                const AnatomyStats& stats);

struct DepthLossResult {
  double value = 0.0;
  std::array<double, kNumJoints> grad{};  // d(value)/d(pred_z)
};

/// Smooth-L1 depth error. Default mode applies the Huber function to each
/// raw per-joint residual and sums; kLiteralSquaredNorm applies it to the
/// squared L2 norm of the whole residual vector instead.
DepthLossResult smooth_l1_depth(const std::array<double, kNumJoints>& pred_z,
                                const std::array<double, kNumJoints>& gt_z,
                                double delta,
                                DepthLossMode mode = DepthLossMode::kPerJointHuber);

/// Mean ratio, population ratio variance, per-angle [min, max] ranges, and
/// middle-normalized mean finger lengths over a 3D-annotated corpus.
/// Throws EmptyCorpus / ZeroLengthFinger.
AnatomyStats fit_stats(const std::vector<HandSample>& corpus);

struct PosePrediction {
  heatmap::HeatmapStack heatmaps;
  std::array<double, kNumJoints> z{};  // predicted depths, mm
};

struct StageLossResult {
  double total = 0.0;
  double term_2d = 0.0;
  double term_depth = 0.0;   // Huber depth term (0 when unused)
  double term_ratio = 0.0;   // unweighted L_fr (0 when unused)
  double term_angle = 0.0;   // unweighted L_ar (0 when unused)
  std::array<double, kNumJoints> grad_z{};
  heatmap::StackGradient grad_heatmaps;
};

/// Stage losses of the weakly supervised schedule. Stage 1: L_2D + Huber
/// depth (depth term 0 when the sample has no 3D annotation). Stage 2:
/// the stage-1 value when 3D is available, otherwise
/// L_2D + beta_fr L_fr + beta_ar L_ar evaluated on the pose decoded from the
/// predicted heatmaps (argmax) and depths, back-projected through the sample
/// intrinsics when present. Constraint gradients flow to z only.
StageLossResult stage_loss(const HandSample& sample, const PosePrediction& pred,
                           const heatmap::HeatmapStack& gt_heatmaps,
                           const AnatomyStats& stats, const LossConfig& cfg,
                           int stage);

/// Fully combined form: L_2D + Huber depth + beta_fr L_fr + beta_ar L_ar.
StageLossResult overall_loss(const HandSample& sample,
                             const PosePrediction& pred,
                             const heatmap::HeatmapStack& gt_heatmaps,
                             const AnatomyStats& stats, const LossConfig& cfg);

/// Two-branch base composition: L_2D + (lambda_reg * sum of squared depth
/// residuals when 3D is available, else lambda_geo * (beta_fr L_fr +
/// beta_ar L_ar)).
StageLossResult base_loss(const HandSample& sample, const PosePrediction& pred,
                          const heatmap::HeatmapStack& gt_heatmaps,
                          const AnatomyStats& stats, const LossConfig& cfg);

}  // namespace handgeo::anatomy
