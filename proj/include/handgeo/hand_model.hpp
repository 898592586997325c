#pragma once

#include <array>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "handgeo/errors.hpp"

namespace handgeo {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

inline constexpr int kNumJoints = 21;
inline constexpr int kNumFingers = 5;
inline constexpr int kDigitsPerFinger = 3;
inline constexpr int kNumDigits = kNumFingers * kDigitsPerFinger;

enum class Finger : int { kThumb = 0, kIndex, kMiddle, kRing, kLittle };

/// Joint role within a finger, ordered palm-outward.
enum class JointRole : int { kMcp = 0, kPip, kDip, kTip };

// Canonical joint encoding: 0 = WRIST, then finger f, role r at f*4 + 1 + r.
enum class JointId : int {
  kWrist = 0,
  kThumbMcp, kThumbPip, kThumbDip, kThumbTip,
  kIndexMcp, kIndexPip, kIndexDip, kIndexTip,
  kMiddleMcp, kMiddlePip, kMiddleDip, kMiddleTip,
  kRingMcp, kRingPip, kRingDip, kRingTip,
  kLittleMcp, kLittlePip, kLittleDip, kLittleTip,
};

enum class HandSide { kLeft, kRight };

inline JointId joint_of(Finger finger, JointRole role) {
  return static_cast<JointId>(static_cast<int>(finger) * 4 + 1 +
                              static_cast<int>(role));
}

inline int joint_index(JointId id) { return static_cast<int>(id); }
inline int joint_index(Finger finger, JointRole role) {
  return joint_index(joint_of(finger, role));
}

/// Stable name for a joint id ("wrist", "index_pip", ...).
const std::string& joint_name(JointId id);

/// Inverse of joint_name. Throws Error for unknown names.
JointId joint_from_name(const std::string& name);

const std::string& finger_name(Finger finger);
Finger finger_from_name(const std::string& name);

enum class DigitSegment : int { kProximal = 0, kMiddle, kDistal };

/// One finger bone: PROXIMAL=(MCP,PIP), MIDDLE=(PIP,DIP), DISTAL=(DIP,TIP).
struct Digit {
  Finger finger;
  DigitSegment segment;

  JointId from() const {
    return joint_of(finger, static_cast<JointRole>(static_cast<int>(segment)));
  }
  JointId to() const {
    return joint_of(finger,
                    static_cast<JointRole>(static_cast<int>(segment) + 1));
  }
};

/// All 15 digits, thumb-to-little, proximal-to-distal within each finger.
const std::array<Digit, kNumDigits>& all_digits();

/// 21 named joints of one hand. 3D in millimeters (camera frame), 2D in
/// pixels. Immutable by convention: operations never mutate their inputs.
struct HandPose {
  HandSide side = HandSide::kRight;
  std::array<Vec3, kNumJoints> joints3d{};
  std::array<Vec2, kNumJoints> joints2d{};
  std::array<bool, kNumJoints> visibility{};

  const Vec3& joint3d(JointId id) const { return joints3d[joint_index(id)]; }
  const Vec2& joint2d(JointId id) const { return joints2d[joint_index(id)]; }
};

struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
};

/// One annotated sample. has_3d=false means joints3d carries no information
/// (the sample came from 2D-only data).
struct HandSample {
  std::string id;
  HandPose pose;
  std::optional<CameraIntrinsics> intrinsics;
  bool has_3d = true;
};

/// to - from of the digit endpoints, in millimeters.
Vec3 digit_vector(const HandPose& pose, const Digit& digit);

/// Deterministic forward-kinematics generator used as the geometry oracle.
///
/// The hand is built flat in the z = root.z plane: fingers fan from the
/// wrist with MCP spread given by `abduction_deg` (adjacent proximal pairs,
/// thumb-index first), and each flexion angle rotates the remaining chain
/// in-plane about the inward normal. For the generated pose, measured digit
/// lengths equal `bone_lengths_mm` and measured flexion/abduction angles
/// (anatomy::digit_angle) equal the inputs to 1e-9 relative.
///
/// Caveat: the MID_DIST normal is derived from (MCP, PIP, DIP), so its
/// orientation flips when the PROX_MID angle of the same finger is reflex;
/// exact MID_DIST round trips need PROX_MID inputs in (0, 180).
///
/// bone_lengths_mm: 15 values, finger-major (thumb prox, thumb mid, thumb
/// dist, index prox, ...). flexion_deg: 10 values, per finger the PROX_MID
/// then MID_DIST angle. abduction_deg: 4 adjacent-pair spreads.
/// joints2d is filled with the (x, y) of joints3d; all joints visible.
HandPose synth_hand(HandSide side,
                    const std::array<double, kNumDigits>& bone_lengths_mm,
                    const std::array<double, 10>& flexion_deg,
                    const std::array<double, 4>& abduction_deg,
                    const Vec3& root);

/// Reflect a pose through the plane x = plane_x (joints2d likewise).
HandPose mirror_x(const HandPose& pose, double plane_x);

}  // namespace handgeo
