#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string_view>
#include <optional>

#include "twoview/geometry.hpp"
#include "twoview/triangulation.hpp"

namespace twoview {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Norm { L1, L2, Linf };

inline std::optional<Norm> parse_norm(std::string_view name) {
  if (name == "l1") return Norm::L1;
  if (name == "l2") return Norm::L2;
  if (name == "linf") return Norm::Linf;
  return std::nullopt;
}

inline double error_3d(const Vec3& x_est, const Vec3& x_true) { return (x_est - x_true).norm(); }

/// Per-view reprojection errors in pixels. A view in which the estimate has
/// non-positive depth reports +inf and sets its behind flag.
struct Reprojection {
  double d0 = 0.0;
  double d1 = 0.0;
  bool behind0 = false;
  bool behind1 = false;

  bool finite() const { return !behind0 && !behind1; }
};

inline Reprojection reprojection_errors(const Vec3& x1_est, const ObservationPair& obs,
                                        const RelativePose& pose) {
  if (!obs.intrinsics) throw std::invalid_argument("reprojection_errors requires intrinsics");
  const Intrinsics& K = *obs.intrinsics;
  auto one = [&K](const Vec3& x, const Bearing& f, bool& behind) {
    if (!(x.z() > 0.0)) {
      behind = true;
      return kInfinity;
    }
    const double dx = f.x() / f.z() - x.x() / x.z();
    const double dy = f.y() / f.z() - x.y() / x.z();
    return std::hypot(K.fx * dx, K.fy * dy);
  };
  Reprojection out;
  out.d0 = one(transform_to_frame0(x1_est, pose), obs.f0, out.behind0);
  out.d1 = one(x1_est, obs.f1, out.behind1);
  return out;
}

inline double norm_aggregate(double d0, double d1, Norm norm) {
  switch (norm) {
    case Norm::L1: return d0 + d1;
    case Norm::L2: return std::sqrt(d0 * d0 + d1 * d1);
    case Norm::Linf: return std::max(d0, d1);
  }
  return 0.0;
}

/// Parallax seen from the estimated point: the angle between the lines from
/// the point to each camera center.
inline double parallax_estimate(const Vec3& x1_est, const Vec3& t) {
  const Vec3 to_c0 = x1_est - t;
  if (!(x1_est.norm() > 0.0) || !(to_c0.norm() > 0.0)) {
    throw GeometryError(ErrorCode::Undefined, "point coincides with a camera center");
  }
  return angle_between_lines(x1_est, to_c0);
}

struct ParallaxError {
  double magnitude = 0.0;
  int sign = 0;  // +1 overestimated, -1 underestimated, 0 exact
};

inline ParallaxError parallax_error(double beta_true, double beta_est) {
  const double diff = beta_est - beta_true;
  return {std::abs(diff), (diff > 0.0) - (diff < 0.0)};
}

/// Angle between the measured rays, independent of t.
inline double raw_parallax(const Bearing& f0, const Bearing& f1, const RelativePose& pose) {
  return angle_between_lines(pose.R * f0, f1);
}

/// Ratio of the distance error caused by underestimating the parallax by delta
/// to the one caused by overestimating it by delta, for a distance that scales
/// with cot(beta / 2).
inline double relative_impact(double beta, double delta = radians(0.5)) {
  if (!(delta > 0.0) || !(beta > delta) || !(beta < std::numbers::pi - delta)) {
    throw GeometryError(ErrorCode::DomainError, "relative_impact needs delta < beta < pi - delta");
  }
  auto cot = [](double x) { return std::cos(x) / std::sin(x); };
  const double base = cot(beta / 2.0);
  const double under = cot((beta - delta) / 2.0) - base;
  const double over = cot((beta + delta) / 2.0) - base;
  return std::abs(under / over);
}

struct ErrorRecord {
  double e3d = 0.0;
  double d0 = 0.0;
  double d1 = 0.0;
  double e_l1 = 0.0;
  double e_l2 = 0.0;
  double e_linf = 0.0;
  double beta_raw = 0.0;   // radians
  double beta_true = 0.0;  // radians
  double beta_est = 0.0;   // radians, NaN when undefined
  double beta_err = 0.0;   // |beta_true - beta_est|
  double beta_signed = 0.0;  // beta_est - beta_true
  bool adequate = false;
  Method method = Method::Mid;

  double e2d(Norm norm) const {
    switch (norm) {
      case Norm::L1: return e_l1;
      case Norm::L2: return e_l2;
      case Norm::Linf: return e_linf;
    }
    return e_l2;
  }
};

inline ErrorRecord evaluate(const TriangulationResult& result, const ObservationPair& obs,
                            const RelativePose& pose, const Vec3& x_true, double beta_true) {
  ErrorRecord rec;
  rec.method = result.method;
  rec.adequate = result.adequate;
  rec.e3d = error_3d(result.x1, x_true);
  const Reprojection rep = reprojection_errors(result.x1, obs, pose);
  rec.d0 = rep.d0;
  rec.d1 = rep.d1;
  rec.e_l1 = norm_aggregate(rep.d0, rep.d1, Norm::L1);
  rec.e_l2 = norm_aggregate(rep.d0, rep.d1, Norm::L2);
  rec.e_linf = norm_aggregate(rep.d0, rep.d1, Norm::Linf);
  rec.beta_raw = raw_parallax(obs.f0, obs.f1, pose);
  rec.beta_true = beta_true;
  try {
    rec.beta_est = parallax_estimate(result.x1, pose.t);
    const ParallaxError pe = parallax_error(beta_true, rec.beta_est);
    rec.beta_err = pe.magnitude;
    rec.beta_signed = rec.beta_est - beta_true;
  } catch (const GeometryError&) {
    rec.beta_est = rec.beta_err = rec.beta_signed = std::numeric_limits<double>::quiet_NaN();
  }
  return rec;
}

}  // namespace twoview
