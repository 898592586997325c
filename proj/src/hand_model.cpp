#include "handgeo/hand_model.hpp"

#include <cmath>
#include <map>
#include <numbers>

namespace handgeo {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

std::array<std::string, kNumJoints> make_joint_names() {
  std::array<std::string, kNumJoints> names;
  names[0] = "wrist";
  static const char* roles[4] = {"mcp", "pip", "dip", "tip"};
  for (int f = 0; f < kNumFingers; ++f) {
    for (int r = 0; r < 4; ++r) {
      names[f * 4 + 1 + r] =
          finger_name(static_cast<Finger>(f)) + "_" + roles[r];
    }
  }
  return names;
}

const std::array<std::string, kNumJoints>& joint_names() {
  static const auto names = make_joint_names();
  return names;
}

// MCP distance from the wrist, per finger. Fixed plausible palm geometry;
// round trips do not depend on these.
constexpr std::array<double, kNumFingers> kPalmRadiusMm = {30.0, 80.0, 82.0,
                                                           76.0, 68.0};

// Unit direction in the palm plane at azimuth a (degrees) from +y, rotating
// toward -x for positive a (right-hand layout puts the thumb on the -x side).
Vec3 palm_direction(double azimuth_deg) {
  const double a = azimuth_deg * kDegToRad;
  return Vec3(-std::sin(a), std::cos(a), 0.0);
}

}  // namespace

const std::string& joint_name(JointId id) {
  return joint_names()[joint_index(id)];
}

JointId joint_from_name(const std::string& name) {
  for (int i = 0; i < kNumJoints; ++i) {
    if (joint_names()[i] == name) return static_cast<JointId>(i);
  }
  throw Error("unknown joint name: " + name);
}

const std::string& finger_name(Finger finger) {
  static const std::array<std::string, kNumFingers> names = {
      "thumb", "index", "middle", "ring", "little"};
  return names[static_cast<int>(finger)];
}

Finger finger_from_name(const std::string& name) {
  for (int f = 0; f < kNumFingers; ++f) {
    if (finger_name(static_cast<Finger>(f)) == name)
      return static_cast<Finger>(f);
  }
  throw Error("unknown finger name: " + name);
}

const std::array<Digit, kNumDigits>& all_digits() {
  static const std::array<Digit, kNumDigits> digits = [] {
    std::array<Digit, kNumDigits> d{};
    int i = 0;
    for (int f = 0; f < kNumFingers; ++f) {
      for (int s = 0; s < kDigitsPerFinger; ++s) {
        d[i++] = Digit{static_cast<Finger>(f), static_cast<DigitSegment>(s)};
      }
    }
    return d;
  }();
  return digits;
}

Vec3 digit_vector(const HandPose& pose, const Digit& digit) {
  return pose.joint3d(digit.to()) - pose.joint3d(digit.from());
}

HandPose mirror_x(const HandPose& pose, double plane_x) {
  HandPose out = pose;
  out.side = pose.side == HandSide::kRight ? HandSide::kLeft : HandSide::kRight;
  for (int j = 0; j < kNumJoints; ++j) {
    out.joints3d[j].x() = 2.0 * plane_x - pose.joints3d[j].x();
    out.joints2d[j].x() = 2.0 * plane_x - pose.joints2d[j].x();
  }
  return out;
}

HandPose synth_hand(HandSide side,
                    const std::array<double, kNumDigits>& bone_lengths_mm,
                    const std::array<double, 10>& flexion_deg,
                    const std::array<double, 4>& abduction_deg,
                    const Vec3& root) {
  for (int i = 0; i < kNumDigits; ++i) {
    if (!(bone_lengths_mm[i] > 0.0)) {
      throw NonPositiveLength("bone length " + std::to_string(i) +
                              " must be > 0, got " +
                              std::to_string(bone_lengths_mm[i]));
    }
  }
  for (double a : flexion_deg) {
    if (!std::isfinite(a)) throw Error("non-finite flexion angle");
  }
  for (double a : abduction_deg) {
    if (!std::isfinite(a)) throw Error("non-finite abduction angle");
  }

  // Azimuths from the adjacent spreads, middle finger pinned at 0.
  std::array<double, kNumFingers> azimuth{};
  azimuth[2] = 0.0;
  azimuth[1] = abduction_deg[1];
  azimuth[0] = abduction_deg[1] + abduction_deg[0];
  azimuth[3] = -abduction_deg[2];
  azimuth[4] = -abduction_deg[2] - abduction_deg[3];

  // Build the right-hand layout, flat in the z = root.z plane. The inward
  // normal of this layout is -z; flexion rotates the remaining chain about
  // it, i.e. positive angles curl toward the palm body.
  HandPose pose;
  pose.side = HandSide::kRight;
  pose.joints3d[0] = root;
  const auto rotate_inward = [](const Vec3& v, double deg) {
    // Rotation about -z by deg = rotation about +z by -deg.
    const double a = deg * kDegToRad;
    const double c = std::cos(a), s = std::sin(a);
    return Vec3(c * v.x() + s * v.y(), -s * v.x() + c * v.y(), v.z());
  };

  for (int f = 0; f < kNumFingers; ++f) {
    const Vec3 dir = palm_direction(azimuth[f]);
    const Vec3 mcp = root + kPalmRadiusMm[f] * dir;
    const Vec3 prox = dir;
    const Vec3 mid = rotate_inward(prox, flexion_deg[f * 2]);
    const Vec3 dist = rotate_inward(mid, flexion_deg[f * 2 + 1]);
    const Vec3 pip = mcp + bone_lengths_mm[f * 3] * prox;
    const Vec3 dip = pip + bone_lengths_mm[f * 3 + 1] * mid;
    const Vec3 tip = dip + bone_lengths_mm[f * 3 + 2] * dist;
    pose.joints3d[f * 4 + 1] = mcp;
    pose.joints3d[f * 4 + 2] = pip;
    pose.joints3d[f * 4 + 3] = dip;
    pose.joints3d[f * 4 + 4] = tip;
  }

  for (int j = 0; j < kNumJoints; ++j) {
    pose.joints2d[j] = pose.joints3d[j].head<2>();
    pose.visibility[j] = true;
  }

  if (side == HandSide::kLeft) {
    pose = mirror_x(pose, root.x());
  }
  return pose;
}

}  // namespace handgeo
