#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SVD>

namespace twoview {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Rays whose unit directions have a cross product shorter than this are
/// treated as parallel.
inline constexpr double kParallelEpsilon = 1e-12;

enum class ErrorCode {
  DegenerateRays,
  DegenerateWeights,
  SolveFailure,
  UnknownConfig,
  Undefined,
  DomainError,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateRays: return "degenerate rays";
    case ErrorCode::DegenerateWeights: return "degenerate weights";
    case ErrorCode::SolveFailure: return "solve failure";
    case ErrorCode::UnknownConfig: return "unknown config";
    case ErrorCode::Undefined: return "undefined";
    case ErrorCode::DomainError: return "domain error";
  }
  return "unknown";
}

class GeometryError : public std::runtime_error {
 public:
  GeometryError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Pinhole calibration without skew.
struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  Intrinsics() = default;
  Intrinsics(double fx_, double fy_, double cx_, double cy_) : fx(fx_), fy(fy_), cx(cx_), cy(cy_) {
    if (!(fx > 0.0) || !(fy > 0.0)) {
      throw std::invalid_argument("Intrinsics: focal lengths must be positive");
    }
  }

  Mat3 matrix() const {
    Mat3 K;
    K << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
    return K;
  }

  /// Pixel coordinates of a camera-frame point. Requires p.z() != 0.
  Vec2 project(const Vec3& p) const {
    return {fx * p.x() / p.z() + cx, fy * p.y() / p.z() + cy};
  }
};

/// Maps frame-0 coordinates into frame 1: x1 = R * x0 + t.
struct RelativePose {
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();

  Vec3 apply(const Vec3& x0) const { return R * x0 + t; }
  Vec3 center0() const { return t; }  // camera-0 center seen from frame 1
};

/// Ray direction in its own camera frame. Not necessarily unit length.
using Bearing = Vec3;

/// A single two-view correspondence. u0/u1 are pixel measurements; f0/f1 are
/// the corresponding bearings (K^-1 u when intrinsics are known).
struct ObservationPair {
  Vec2 u0 = Vec2::Zero();
  Vec2 u1 = Vec2::Zero();
  Bearing f0 = Bearing::UnitZ();
  Bearing f1 = Bearing::UnitZ();
  std::optional<Intrinsics> intrinsics;
};

struct Line3D {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();

  Line3D() = default;
  Line3D(const Vec3& c, const Vec3& m) : origin(c), direction(m.normalized()) {}

  Vec3 at(double s) const { return origin + s * direction; }
};

inline Vec3 homogeneous(const Vec2& u) { return {u.x(), u.y(), 1.0}; }

/// Returns K^-1 u. The third component equals u.z(), so it is positive for
/// ordinary homogeneous pixels.
inline Bearing backproject(const Vec3& u, const Intrinsics& K, bool normalize = false) {
  const double w = u.z();
  Bearing f((u.x() - K.cx * w) / K.fx, (u.y() - K.cy * w) / K.fy, w);
  if (normalize) f.normalize();
  return f;
}

inline Bearing backproject(const Vec2& pixel, const Intrinsics& K, bool normalize = false) {
  return backproject(homogeneous(pixel), K, normalize);
}

/// f1^ . (t x R f0^). Zero iff the two rays and the baseline are coplanar.
inline double epipolar_residual(const Bearing& f0, const Bearing& f1, const RelativePose& pose) {
  return f1.normalized().dot(pose.t.cross(pose.R * f0.normalized()));
}

inline Vec3 transform_to_frame0(const Vec3& x1, const RelativePose& pose) {
  return pose.R.transpose() * (x1 - pose.t);
}

/// Angle between the lines spanned by a and b, in [0, pi/2].
inline double angle_between_lines(const Vec3& a, const Vec3& b) {
  const Vec3 ah = a.normalized();
  const Vec3 bh = b.normalized();
  return std::atan2(ah.cross(bh).norm(), std::abs(ah.dot(bh)));
}

/// Projects a near-rotation onto SO(3) via SVD.
inline Mat3 orthonormalize(const Mat3& M) {
  Eigen::JacobiSVD<Mat3> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 U = svd.matrixU();
  const Mat3 V = svd.matrixV();
  if ((U * V.transpose()).determinant() < 0.0) U.col(2) *= -1.0;
  return U * V.transpose();
}

inline double radians(double degrees) { return degrees * (std::numbers::pi / 180.0); }
inline double degrees(double radians) { return radians * (180.0 / std::numbers::pi); }

}  // namespace twoview
