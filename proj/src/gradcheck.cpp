#include "handgeo/gradcheck.hpp"

#include <cmath>
#include <random>

#include "handgeo/anatomy.hpp"
#include "handgeo/crop.hpp"
#include "handgeo/heatmap.hpp"

namespace handgeo::gradcheck {

namespace {

constexpr double kGradFloor = 1e-8;

double rel_error(double analytic, double numeric) {
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  if (scale <= kGradFloor) return -1.0;  // both negligible, skip
  return std::abs(analytic - numeric) / scale;
}

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  double next() { return uniform01(gen()); }
  double range(double lo, double hi) { return lo + (hi - lo) * next(); }
  int index(int n) { return static_cast<int>(gen() % static_cast<std::uint64_t>(n)); }
};

void record(CheckResult& result, double analytic, double numeric) {
  const double e = rel_error(analytic, numeric);
  if (e < 0.0) return;
  ++result.coords_checked;
  result.max_rel_error = std::max(result.max_rel_error, e);
}

heatmap::HeatmapStack random_stack(Rng& rng, int w, int h) {
  std::vector<heatmap::Heatmap> maps;
  maps.reserve(kNumJoints);
  for (int j = 0; j < kNumJoints; ++j) {
    std::vector<double> v(static_cast<std::size_t>(w) * h);
    // Keep values away from 0 so a -h probe stays valid heatmap data.
    for (double& x : v) x = rng.range(0.1, 1.0);
    maps.emplace_back(w, h, std::move(v));
  }
  return heatmap::HeatmapStack(std::move(maps));
}

heatmap::HeatmapStack perturbed(const heatmap::HeatmapStack& stack, int joint,
                                int pixel, double delta) {
  std::vector<heatmap::Heatmap> maps;
  maps.reserve(kNumJoints);
  for (int j = 0; j < kNumJoints; ++j) {
    std::vector<double> v = stack.map(j).values();
    if (j == joint) v[pixel] += delta;
    maps.emplace_back(stack.width(), stack.height(), std::move(v));
  }
  return heatmap::HeatmapStack(std::move(maps));
}

CheckResult check_attention_loss(Rng& rng, int trials) {
  CheckResult result{"attention_loss", trials, 0, 0.0, 1e-6, false};
  const int w = 16, h = 16;
  const double step = 1e-5;
  for (int t = 0; t < trials; ++t) {
    const auto pl = random_stack(rng, w, h);
    const auto pr = random_stack(rng, w, h);
    const auto gl = random_stack(rng, w, h);
    const auto gr = random_stack(rng, w, h);
    const auto res = heatmap::attention_loss(pl, pr, gl, gr);
    for (int probe = 0; probe < 10; ++probe) {
      const int joint = rng.index(kNumJoints);
      const int pixel = rng.index(w * h);
      const bool left = rng.next() < 0.5;
      const auto& pred = left ? pl : pr;
      const auto hi = heatmap::attention_loss(
          left ? perturbed(pred, joint, pixel, step) : pl,
          left ? pr : perturbed(pred, joint, pixel, step), gl, gr);
      const auto lo = heatmap::attention_loss(
          left ? perturbed(pred, joint, pixel, -step) : pl,
          left ? pr : perturbed(pred, joint, pixel, -step), gl, gr);
      const double numeric = (hi.value - lo.value) / (2.0 * step);
      const double analytic = left ? res.grad_left.maps[joint][pixel]
                                   : res.grad_right.maps[joint][pixel];
      record(result, analytic, numeric);
    }
  }
  result.pass = result.max_rel_error < result.tolerance;
  return result;
}

CheckResult check_heatmap_2d_loss(Rng& rng, int trials) {
  CheckResult result{"heatmap_2d_loss", trials, 0, 0.0, 1e-6, false};
  const int w = 16, h = 16;
  const double step = 1e-5;
  for (int t = 0; t < trials; ++t) {
    const auto pred = random_stack(rng, w, h);
    const auto gt = random_stack(rng, w, h);
    const auto res = heatmap::heatmap_2d_loss(pred, gt);
    for (int probe = 0; probe < 10; ++probe) {
      const int joint = rng.index(kNumJoints);
      const int pixel = rng.index(w * h);
      const auto hi =
          heatmap::heatmap_2d_loss(perturbed(pred, joint, pixel, step), gt);
      const auto lo =
          heatmap::heatmap_2d_loss(perturbed(pred, joint, pixel, -step), gt);
      const double numeric = (hi.value - lo.value) / (2.0 * step);
      record(result, res.grad.maps[joint][pixel], numeric);
    }
  }
  result.pass = result.max_rel_error < result.tolerance;
  return result;
}

CheckResult check_crop_loss(Rng& rng, int trials) {
  CheckResult result{"crop_loss", trials, 0, 0.0, 1e-6, false};
  const double step = 1e-6;
  for (int t = 0; t < trials; ++t) {
    const double x1 = rng.range(0.0, 100.0);
    const double y1 = rng.range(0.0, 100.0);
    const double side = rng.range(5.0, 120.0);
    const heatmap::SquareBox box{x1, y1, x1 + side, y1 + side};
    crop::AffineParams theta;
    theta.a = rng.range(0.2, 2.0);
    theta.b = rng.range(-0.5, 0.5);
    theta.tx = rng.range(-50.0, 50.0);
    theta.c = rng.range(-0.5, 0.5);
    theta.d = rng.range(0.2, 2.0);
    theta.ty = rng.range(-50.0, 50.0);

    const auto res = crop::crop_loss(theta, box, 64, 64);
    static constexpr double crop::AffineParams::* kFields[6] = {
        &crop::AffineParams::a, &crop::AffineParams::b,
        &crop::AffineParams::tx, &crop::AffineParams::c,
        &crop::AffineParams::d, &crop::AffineParams::ty};
    for (int k = 0; k < 6; ++k) {
      crop::AffineParams probe = theta;
      probe.*kFields[k] += step;
      const double hi = crop::crop_loss(probe, box, 64, 64).value;
      probe.*kFields[k] -= 2.0 * step;
      const double lo = crop::crop_loss(probe, box, 64, 64).value;
      const double numeric = (hi - lo) / (2.0 * step);
      record(result, res.grad[k], numeric);
    }
  }
  result.pass = result.max_rel_error < result.tolerance;
  return result;
}

anatomy::AnatomyStats stats_with_active_hinges(Rng& rng,
                                               const HandPose& pose) {
  anatomy::AnatomyStats stats;
  stats.mean_ratio = 1.1;
  stats.per_finger_mean_lengths = {6.4, 9.5, 10.0, 9.0, 7.4};
  for (const anatomy::AngleId& id : anatomy::all_angle_ids()) {
    const double theta = anatomy::digit_angle(pose, id);
    anatomy::AngleRange range{id, 0.0, 0.0};
    const double mode = rng.next();
    if (mode < 0.4) {  // below-min hinge active
      range.min_deg = theta + rng.range(3.0, 15.0);
      range.max_deg = range.min_deg + rng.range(10.0, 40.0);
    } else if (mode < 0.8) {  // above-max hinge active
      range.max_deg = theta - rng.range(3.0, 15.0);
      range.min_deg = range.max_deg - rng.range(10.0, 40.0);
    } else {  // inside, inactive
      range.min_deg = theta - rng.range(10.0, 30.0);
      range.max_deg = theta + rng.range(10.0, 30.0);
    }
    stats.angle_ranges.push_back(range);
  }
  return stats;
}

CheckResult check_smooth_l1(Rng& rng, int trials) {
  CheckResult result{"smooth_l1_depth", trials, 0, 0.0, 1e-6, false};
  const double delta = 2.0;
  const double step = 1e-6;
  for (int t = 0; t < trials; ++t) {
    std::array<double, kNumJoints> pred{}, gt{};
    for (int j = 0; j < kNumJoints; ++j) {
      gt[j] = rng.range(-10.0, 10.0);
      // Keep residuals away from the |r| = delta kink.
      double r = rng.range(-3.0 * delta, 3.0 * delta);
      if (std::abs(std::abs(r) - delta) < 0.05) r += 0.1;
      pred[j] = gt[j] + r;
    }
    const auto res = anatomy::smooth_l1_depth(pred, gt, delta);
    for (int probe = 0; probe < 10; ++probe) {
      const int joint = rng.index(kNumJoints);
      auto hi = pred, lo = pred;
      hi[joint] += step;
      lo[joint] -= step;
      const double numeric = (anatomy::smooth_l1_depth(hi, gt, delta).value -
                              anatomy::smooth_l1_depth(lo, gt, delta).value) /
                             (2.0 * step);
      record(result, res.grad[joint], numeric);
    }
  }
  result.pass = result.max_rel_error < result.tolerance;
  return result;
}

}  // namespace

double uniform01(std::uint64_t raw) {
  return static_cast<double>(raw >> 11) * 0x1.0p-53;
}

HandPose random_jittered_pose(std::uint64_t seed) {
  Rng rng(seed);
  std::array<double, kNumDigits> bones{};
  for (double& b : bones) b = rng.range(20.0, 50.0);
  std::array<double, 10> flexion{};
  for (double& a : flexion) a = rng.range(15.0, 165.0);
  std::array<double, 4> abduction{};
  for (double& a : abduction) a = rng.range(6.0, 22.0);
  const Vec3 root(rng.range(-40.0, 40.0), rng.range(-40.0, 40.0),
                  rng.range(200.0, 600.0));
  const HandSide side = rng.next() < 0.5 ? HandSide::kLeft : HandSide::kRight;
  HandPose pose = synth_hand(side, bones, flexion, abduction, root);
  for (int j = 0; j < kNumJoints; ++j) {
    for (int axis = 0; axis < 3; ++axis) {
      pose.joints3d[j][axis] += rng.range(-2.0, 2.0);
    }
  }
  return pose;
}

std::vector<CheckResult> run_suite(std::uint64_t seed, int trials_per_loss) {
  std::vector<CheckResult> results;
  {
    Rng rng(seed ^ 0x1111);
    results.push_back(check_attention_loss(rng, trials_per_loss));
  }
  {
    Rng rng(seed ^ 0x2222);
    results.push_back(check_heatmap_2d_loss(rng, trials_per_loss));
  }
  {
    Rng rng(seed ^ 0x3333);
    results.push_back(check_crop_loss(rng, trials_per_loss));
  }
  {
    Rng rng(seed ^ 0x4444);
    CheckResult result{"ratio_loss", trials_per_loss, 0, 0.0, 1e-5, false};
    const double step = 1e-4;
    anatomy::AnatomyStats stats;
    stats.mean_ratio = 1.3;  // generic poses sit away from this target
    for (int t = 0; t < trials_per_loss; ++t) {
      const HandPose pose = random_jittered_pose(rng.gen());
      const auto res = anatomy::ratio_loss(pose, stats);
      for (int probe = 0; probe < 12; ++probe) {
        const int joint = rng.index(kNumJoints);
        const int axis = rng.index(3);
        HandPose hi = pose, lo = pose;
        hi.joints3d[joint][axis] += step;
        lo.joints3d[joint][axis] -= step;
        const double numeric = (anatomy::ratio_loss(hi, stats).value -
                                anatomy::ratio_loss(lo, stats).value) /
                               (2.0 * step);
        record(result, res.grad[joint][axis], numeric);
      }
    }
    result.pass = result.max_rel_error < result.tolerance;
    results.push_back(result);
  }
  {
    Rng rng(seed ^ 0x5555);
    CheckResult result{"angle_range_loss", trials_per_loss, 0, 0.0, 1e-5,
                       false};
    const double step = 1e-4;
    for (int t = 0; t < trials_per_loss; ++t) {
      const HandPose pose = random_jittered_pose(rng.gen());
      const anatomy::AnatomyStats stats = stats_with_active_hinges(rng, pose);
      const auto res = anatomy::angle_range_loss(pose, stats);
      for (int probe = 0; probe < 12; ++probe) {
        const int joint = rng.index(kNumJoints);
        const int axis = rng.index(3);
        HandPose hi = pose, lo = pose;
        hi.joints3d[joint][axis] += step;
        lo.joints3d[joint][axis] -= step;
        const double numeric = (anatomy::angle_range_loss(hi, stats).value -
                                anatomy::angle_range_loss(lo, stats).value) /
                               (2.0 * step);
        record(result, res.grad[joint][axis], numeric);
      }
    }
    result.pass = result.max_rel_error < result.tolerance;
    results.push_back(result);
  }
  {
    Rng rng(seed ^ 0x6666);
    results.push_back(check_smooth_l1(rng, trials_per_loss));
  }
  return results;
}

}  // namespace handgeo::gradcheck
