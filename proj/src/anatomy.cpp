#include "handgeo/anatomy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace handgeo::anatomy {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;
constexpr double kParallelEps = 1e-12;

int mcp(Finger f) { return joint_index(f, JointRole::kMcp); }
int pip(Finger f) { return joint_index(f, JointRole::kPip); }
int dip(Finger f) { return joint_index(f, JointRole::kDip); }
int tip(Finger f) { return joint_index(f, JointRole::kTip); }

/// A difference vector P[plus] - P[minus] with its joint indices, so scalar
/// gradients can be scattered back onto the pose.
struct PointVec {
  Vec3 v;
  int plus;
  int minus;
};

PointVec point_vec(const HandPose& pose, int plus, int minus) {
  return {pose.joints3d[plus] - pose.joints3d[minus], plus, minus};
}

void scatter(std::array<Vec3, kNumJoints>& grad, const PointVec& pv,
             const Vec3& g) {
  grad[pv.plus] += g;
  grad[pv.minus] -= g;
}

/// The four geometry vectors of one constrained angle: the measured pair
/// (u, v) and the normal-construction pair (a, b) with n_raw = a x b.
struct AngleGeometry {
  PointVec u, v, a, b;
};

AngleGeometry angle_geometry(const HandPose& pose, const AngleId& id) {
  const Finger f = id.finger;
  switch (id.kind) {
    case AngleKind::kProxMid: {
      AngleGeometry g;
      g.u = point_vec(pose, pip(f), mcp(f));
      g.v = point_vec(pose, dip(f), pip(f));
      if (f == Finger::kLittle) {
        // No further finger exists; the index MCP with reversed order keeps
        // the normal pointing into the palm.
        g.a = point_vec(pose, mcp(Finger::kIndex), mcp(f));
        g.b = point_vec(pose, pip(f), mcp(f));
      } else {
        const Finger next = static_cast<Finger>(static_cast<int>(f) + 1);
        g.a = point_vec(pose, pip(f), mcp(f));
        g.b = point_vec(pose, mcp(next), mcp(f));
      }
      return g;
    }
    case AngleKind::kMidDist: {
      AngleGeometry g;
      g.u = point_vec(pose, dip(f), pip(f));
      g.v = point_vec(pose, tip(f), dip(f));
      g.a = point_vec(pose, pip(f), mcp(f));
      g.b = point_vec(pose, dip(f), pip(f));
      return g;
    }
    case AngleKind::kAbduction: {
      if (f == Finger::kLittle) {
        throw Error("abduction pairs are thumb..ring");
      }
      const Finger next = static_cast<Finger>(static_cast<int>(f) + 1);
      AngleGeometry g;
      g.u = point_vec(pose, pip(f), mcp(f));
      g.v = point_vec(pose, pip(next), mcp(next));
      g.a = point_vec(pose, mcp(Finger::kIndex), joint_index(JointId::kWrist));
      g.b = point_vec(pose, mcp(Finger::kLittle), joint_index(JointId::kWrist));
      return g;
    }
  }
  throw Error("unreachable angle kind");
}

Vec3 normal_from(const PointVec& a, const PointVec& b, const AngleId& id) {
  const Vec3 w = a.v.cross(b.v);
  const double norm = w.norm();
  if (norm <= kParallelEps * a.v.norm() * b.v.norm() || norm == 0.0) {
    throw CollinearJoints("normal construction joints are collinear for " +
                          angle_kind_name(id.kind) + "/" +
                          finger_name(id.finger));
  }
  return w / norm;
}

double wrap_deg(double deg) {
  if (deg < 0.0) deg += 360.0;
  if (deg >= 360.0) deg -= 360.0;
  return deg;
}

struct FingerLengths {
  std::array<double, kNumFingers> len{};
};

FingerLengths all_finger_lengths(const HandPose& pose) {
  FingerLengths out;
  for (int f = 0; f < kNumFingers; ++f) {
    out.len[f] = finger_length(pose, static_cast<Finger>(f));
  }
  return out;
}

double mean_ratio_from_lengths(const std::array<double, kNumFingers>& len) {
  double sum = 0.0;
  for (int n = 0; n < kNumFingers; ++n) {
    if (!(len[n] > 0.0)) {
      throw ZeroLengthFinger("finger " +
                             finger_name(static_cast<Finger>(n)) +
                             " has zero length");
    }
    double suffix = 0.0;
    for (int m = n + 1; m < kNumFingers; ++m) suffix += len[m];
    sum += suffix / len[n];
  }
  return sum / 10.0;  // C(5,2) ordered pairs
}

double huber(double r, double delta) {
  const double a = std::abs(r);
  return a <= delta ? 0.5 * r * r : delta * (a - 0.5 * delta);
}

double huber_derivative(double r, double delta) {
  const double a = std::abs(r);
  return a <= delta ? r : (r > 0.0 ? delta : -delta);
}

}  // namespace

const std::vector<AngleId>& all_angle_ids() {
  static const std::vector<AngleId> ids = [] {
    std::vector<AngleId> v;
    for (int f = 0; f < kNumFingers; ++f) {
      v.push_back({AngleKind::kProxMid, static_cast<Finger>(f)});
    }
    for (int f = 0; f < kNumFingers; ++f) {
      v.push_back({AngleKind::kMidDist, static_cast<Finger>(f)});
    }
    for (int f = 0; f + 1 < kNumFingers; ++f) {
      v.push_back({AngleKind::kAbduction, static_cast<Finger>(f)});
    }
    return v;
  }();
  return ids;
}

std::string angle_kind_name(AngleKind kind) {
  switch (kind) {
    case AngleKind::kProxMid: return "prox_mid";
    case AngleKind::kMidDist: return "mid_dist";
    case AngleKind::kAbduction: return "abduction";
  }
  throw Error("unreachable angle kind");
}

AngleKind angle_kind_from_name(const std::string& name) {
  if (name == "prox_mid") return AngleKind::kProxMid;
  if (name == "mid_dist") return AngleKind::kMidDist;
  if (name == "abduction") return AngleKind::kAbduction;
  throw Error("unknown angle kind: " + name);
}

const AngleRange& AnatomyStats::range(const AngleId& id) const {
  for (const AngleRange& r : angle_ranges) {
    if (r.id == id) return r;
  }
  throw Error("no range fitted for " + angle_kind_name(id.kind) + "/" +
              finger_name(id.finger));
}

void AnatomyStats::validate() const {
  if (!(mean_ratio > 0.0)) throw Error("mean_ratio must be > 0");
  if (ratio_variance < 0.0) throw Error("ratio_variance must be >= 0");
  for (const AngleRange& r : angle_ranges) {
    if (!(r.min_deg <= r.max_deg)) {
      throw Error("angle range min > max for " + angle_kind_name(r.id.kind) +
                  "/" + finger_name(r.id.finger));
    }
  }
}

void LossConfig::validate() const {
  auto nonneg = [](double v, const char* name) {
    if (!(v >= 0.0)) throw Error(std::string(name) + " must be >= 0");
  };
  nonneg(lambda, "lambda");
  nonneg(lambda_reg, "lambda_reg");
  nonneg(lambda_geo, "lambda_geo");
  nonneg(beta_fr, "beta_fr");
  nonneg(beta_ar, "beta_ar");
  if (!(delta_mm > 0.0)) throw Error("delta_mm must be > 0");
  if (!(sigma_px > 0.0)) throw Error("sigma_px must be > 0");
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error("tau must be in [0, 1]");
  if (!(refine_step > 0.0)) throw Error("refine_step must be > 0");
  if (refine_max_iters < 1) throw Error("refine_max_iters must be >= 1");
  if (!(refine_tol >= 0.0)) throw Error("refine_tol must be >= 0");
  if (!(crop_step > 0.0)) throw Error("crop_step must be > 0");
  if (crop_max_iters < 1) throw Error("crop_max_iters must be >= 1");
}

double finger_length(const HandPose& pose, Finger finger) {
  double total = 0.0;
  for (int s = 0; s < kDigitsPerFinger; ++s) {
    total += digit_vector(pose, Digit{finger, static_cast<DigitSegment>(s)})
                 .norm();
  }
  return total;
}

double mean_ratio(const HandPose& pose) {
  return mean_ratio_from_lengths(all_finger_lengths(pose).len);
}

PoseLossResult ratio_loss(const HandPose& pose, const AnatomyStats& stats) {
  const FingerLengths lengths = all_finger_lengths(pose);
  const double r_hat = mean_ratio_from_lengths(lengths.len);

  PoseLossResult out;
  const double diff = r_hat - stats.mean_ratio;
  out.value = diff * diff;

  // dR/dI_n = ( -suffix_n / I_n^2 + sum_{k<n} 1/I_k ) / 10
  std::array<double, kNumFingers> dr_dlen{};
  double prefix_inv = 0.0;
  for (int n = 0; n < kNumFingers; ++n) {
    double suffix = 0.0;
    for (int m = n + 1; m < kNumFingers; ++m) suffix += lengths.len[m];
    dr_dlen[n] = (prefix_inv - suffix / (lengths.len[n] * lengths.len[n])) / 10.0;
    prefix_inv += 1.0 / lengths.len[n];
  }

  const double scale = 2.0 * diff;
  for (const Digit& digit : all_digits()) {
    const Vec3 bone = digit_vector(pose, digit);
    const double norm = bone.norm();
    if (norm == 0.0) continue;  // length gradient of a zero bone is left 0
    const Vec3 g =
        scale * dr_dlen[static_cast<int>(digit.finger)] * (bone / norm);
    out.grad[joint_index(digit.to())] += g;
    out.grad[joint_index(digit.from())] -= g;
  }
  return out;
}

Vec3 inward_normal(const HandPose& pose, const AngleId& id) {
  const AngleGeometry g = angle_geometry(pose, id);
  return normal_from(g.a, g.b, id);
}

double signed_angle_deg(const Vec3& u, const Vec3& v, const Vec3& n) {
  const double s = u.cross(v).dot(n);
  const double c = u.dot(v);
  return wrap_deg(std::atan2(s, c) * kRadToDeg);
}

double digit_angle(const HandPose& pose, const AngleId& id) {
  const AngleGeometry g = angle_geometry(pose, id);
  const double un = g.u.v.norm();
  const double vn = g.v.v.norm();
  if (un == 0.0 || vn == 0.0) {
    throw ZeroLengthDigit("zero-length digit in " + angle_kind_name(id.kind) +
                          "/" + finger_name(id.finger));
  }
  // A straight chain needs no orientation; 0 or 180 regardless of normal.
  if (g.u.v.cross(g.v.v).norm() <= kParallelEps * un * vn) {
    return g.u.v.dot(g.v.v) > 0.0 ? 0.0 : 180.0;
  }
  return signed_angle_deg(g.u.v, g.v.v, normal_from(g.a, g.b, id));
}

PoseLossResult angle_range_loss(const HandPose& pose,
                                const AnatomyStats& stats) {
  PoseLossResult out;
  for (const AngleId& id : all_angle_ids()) {
    const AngleRange& range = stats.range(id);
    const double theta = digit_angle(pose, id);

    double dloss_dtheta = 0.0;
    if (theta < range.min_deg) {
      const double viol = range.min_deg - theta;
      out.value += viol * viol;
      dloss_dtheta = -2.0 * viol;
    } else if (theta > range.max_deg) {
      const double viol = theta - range.max_deg;
      out.value += viol * viol;
      dloss_dtheta = 2.0 * viol;
    }
    if (dloss_dtheta == 0.0) continue;

    // theta = atan2(s, c) with s = (u x v) . n_hat, c = u . v,
    // n_hat = w / |w|, w = a x b.
    const AngleGeometry g = angle_geometry(pose, id);
    const Vec3& u = g.u.v;
    const Vec3& v = g.v.v;
    const Vec3 w = g.a.v.cross(g.b.v);
    const double wn = w.norm();
    if (wn <= kParallelEps * g.a.v.norm() * g.b.v.norm() || wn == 0.0) {
      throw CollinearJoints("normal construction joints are collinear for " +
                            angle_kind_name(id.kind) + "/" +
                            finger_name(id.finger));
    }
    const Vec3 n = w / wn;
    const Vec3 uxv = u.cross(v);
    const double s = uxv.dot(n);
    const double c = u.dot(v);
    const double denom = s * s + c * c;

    // d(theta)/d* = (c ds - s dc) / (s^2 + c^2), converted to degrees.
    const double k = dloss_dtheta * kRadToDeg / denom;
    const Vec3 du = k * (c * v.cross(n) - s * v);
    const Vec3 dv = k * (c * n.cross(u) - s * u);
    const Vec3 dw = (k * c / wn) * (uxv - s * n);  // (I - nn^T)(u x v)/|w|
    const Vec3 da = g.b.v.cross(dw);
    const Vec3 db = dw.cross(g.a.v);

    scatter(out.grad, g.u, du);
    scatter(out.grad, g.v, dv);
    scatter(out.grad, g.a, da);
    scatter(out.grad, g.b, db);
  }
  return out;
}

DepthLossResult smooth_l1_depth(const std::array<double, kNumJoints>& pred_z,
                                const std::array<double, kNumJoints>& gt_z,
                                double delta, DepthLossMode mode) {
  if (!(delta > 0.0)) throw Error("delta must be > 0");
  DepthLossResult out;
  if (mode == DepthLossMode::kPerJointHuber) {
    for (int j = 0; j < kNumJoints; ++j) {
      const double r = pred_z[j] - gt_z[j];
      out.value += huber(r, delta);
      out.grad[j] = huber_derivative(r, delta);
    }
  } else {
    double e = 0.0;
    for (int j = 0; j < kNumJoints; ++j) {
      const double r = pred_z[j] - gt_z[j];
      e += r * r;
    }
    out.value = huber(e, delta);
    const double de = huber_derivative(e, delta);
    for (int j = 0; j < kNumJoints; ++j) {
      out.grad[j] = de * 2.0 * (pred_z[j] - gt_z[j]);
    }
  }
  return out;
}

AnatomyStats fit_stats(const std::vector<HandSample>& corpus) {
  if (corpus.empty()) throw EmptyCorpus("fit_stats needs a non-empty corpus");

  std::vector<double> ratios;
  ratios.reserve(corpus.size());
  std::array<double, kNumFingers> length_sums{};
  AnatomyStats stats;
  for (const AngleId& id : all_angle_ids()) {
    stats.angle_ranges.push_back(
        {id, std::numeric_limits<double>::infinity(),
         -std::numeric_limits<double>::infinity()});
  }

  for (const HandSample& sample : corpus) {
    if (!sample.has_3d) {
      throw Error("fit_stats requires 3D-annotated samples (sample " +
                  sample.id + ")");
    }
    const FingerLengths lengths = all_finger_lengths(sample.pose);
    ratios.push_back(mean_ratio_from_lengths(lengths.len));
    for (int f = 0; f < kNumFingers; ++f) length_sums[f] += lengths.len[f];
    for (std::size_t i = 0; i < stats.angle_ranges.size(); ++i) {
      const double theta = digit_angle(sample.pose, stats.angle_ranges[i].id);
      stats.angle_ranges[i].min_deg =
          std::min(stats.angle_ranges[i].min_deg, theta);
      stats.angle_ranges[i].max_deg =
          std::max(stats.angle_ranges[i].max_deg, theta);
    }
  }

  double mean = 0.0;
  for (double r : ratios) mean += r;
  mean /= static_cast<double>(ratios.size());
  double var = 0.0;
  for (double r : ratios) var += (r - mean) * (r - mean);
  var /= static_cast<double>(ratios.size());

  stats.mean_ratio = mean;
  stats.ratio_variance = var;
  const double middle = length_sums[static_cast<int>(Finger::kMiddle)];
  for (int f = 0; f < kNumFingers; ++f) {
    stats.per_finger_mean_lengths[f] = 10.0 * (length_sums[f] / middle);
  }
  return stats;
}

namespace {

// Pose decoded from predicted heatmaps + depths, with d(joint)/d(z) per
// joint (back-projection when intrinsics exist, else raw (u, v, z)).
struct DecodedPose {
  HandPose pose;
  std::array<Vec3, kNumJoints> dpos_dz{};
};

DecodedPose decode_prediction(const HandSample& sample,
                              const PosePrediction& pred) {
  DecodedPose out;
  out.pose.side = sample.pose.side;
  for (int j = 0; j < kNumJoints; ++j) {
    const heatmap::Heatmap& m = pred.heatmaps.map(j);
    double best = -1.0;
    int bx = 0, by = 0;
    for (int y = 0; y < m.height(); ++y) {
      for (int x = 0; x < m.width(); ++x) {
        if (m.at(x, y) > best) {
          best = m.at(x, y);
          bx = x;
          by = y;
        }
      }
    }
    const double u = bx, v = by, z = pred.z[j];
    if (sample.intrinsics) {
      const CameraIntrinsics& K = *sample.intrinsics;
      out.pose.joints3d[j] =
          Vec3((u - K.cx) * z / K.fx, (v - K.cy) * z / K.fy, z);
      out.dpos_dz[j] = Vec3((u - K.cx) / K.fx, (v - K.cy) / K.fy, 1.0);
    } else {
      out.pose.joints3d[j] = Vec3(u, v, z);
      out.dpos_dz[j] = Vec3(0.0, 0.0, 1.0);
    }
    out.pose.joints2d[j] = Vec2(u, v);
    out.pose.visibility[j] = true;
  }
  return out;
}

void add_constraint_terms(const HandSample& sample, const PosePrediction& pred,
                          const AnatomyStats& stats, const LossConfig& cfg,
                          double weight, StageLossResult& result) {
  const DecodedPose decoded = decode_prediction(sample, pred);
  const PoseLossResult fr = ratio_loss(decoded.pose, stats);
  const PoseLossResult ar = angle_range_loss(decoded.pose, stats);
  result.term_ratio = fr.value;
  result.term_angle = ar.value;
  result.total += weight * (cfg.beta_fr * fr.value + cfg.beta_ar * ar.value);
  for (int j = 0; j < kNumJoints; ++j) {
    const Vec3 g = cfg.beta_fr * fr.grad[j] + cfg.beta_ar * ar.grad[j];
    result.grad_z[j] += weight * g.dot(decoded.dpos_dz[j]);
  }
}

std::array<double, kNumJoints> gt_depths(const HandSample& sample) {
  std::array<double, kNumJoints> z{};
  for (int j = 0; j < kNumJoints; ++j) z[j] = sample.pose.joints3d[j].z();
  return z;
}

StageLossResult with_2d_term(const PosePrediction& pred,
                             const heatmap::HeatmapStack& gt_heatmaps) {
  StageLossResult result;
  heatmap::HeatmapLossResult l2d = heatmap_2d_loss(pred.heatmaps, gt_heatmaps);
  result.term_2d = l2d.value;
  result.total = l2d.value;
  result.grad_heatmaps = std::move(l2d.grad);
  return result;
}

}  // namespace

StageLossResult stage_loss(const HandSample& sample,
                           const PosePrediction& pred,
                           const heatmap::HeatmapStack& gt_heatmaps,
                           const AnatomyStats& stats, const LossConfig& cfg,
                           int stage) {
  if (stage != 1 && stage != 2) throw Error("stage must be 1 or 2");
  StageLossResult result = with_2d_term(pred, gt_heatmaps);
  if (stage == 1 || sample.has_3d) {
    if (sample.has_3d) {
      const DepthLossResult depth =
          smooth_l1_depth(pred.z, gt_depths(sample), cfg.delta_mm, cfg.depth_mode);
      result.term_depth = depth.value;
      result.total += depth.value;
      result.grad_z = depth.grad;
    }
    return result;
  }
  add_constraint_terms(sample, pred, stats, cfg, 1.0, result);
  return result;
}

StageLossResult overall_loss(const HandSample& sample,
                             const PosePrediction& pred,
                             const heatmap::HeatmapStack& gt_heatmaps,
                             const AnatomyStats& stats, const LossConfig& cfg) {
  StageLossResult result = with_2d_term(pred, gt_heatmaps);
  if (sample.has_3d) {
    const DepthLossResult depth =
        smooth_l1_depth(pred.z, gt_depths(sample), cfg.delta_mm, cfg.depth_mode);
    result.term_depth = depth.value;
    result.total += depth.value;
    result.grad_z = depth.grad;
  }
  add_constraint_terms(sample, pred, stats, cfg, 1.0, result);
  return result;
}

StageLossResult base_loss(const HandSample& sample, const PosePrediction& pred,
                          const heatmap::HeatmapStack& gt_heatmaps,
                          const AnatomyStats& stats, const LossConfig& cfg) {
  StageLossResult result = with_2d_term(pred, gt_heatmaps);
  if (sample.has_3d) {
    const std::array<double, kNumJoints> gt_z = gt_depths(sample);
    double reg = 0.0;
    for (int j = 0; j < kNumJoints; ++j) {
      const double r = pred.z[j] - gt_z[j];
      reg += r * r;
      result.grad_z[j] = cfg.lambda_reg * 2.0 * r;
    }
    result.term_depth = reg;
    result.total += cfg.lambda_reg * reg;
    return result;
  }
  add_constraint_terms(sample, pred, stats, cfg, cfg.lambda_geo, result);
  return result;
}

}  // namespace handgeo::anatomy
