#pragma once

// Reference triangulation methods used for comparison against Mid2/wMid2.

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "twoview/geometry.hpp"
#include "twoview/midpoint.hpp"
#include "twoview/triangulation.hpp"

namespace twoview {

struct ClosestPair {
  Vec3 r0;  // on line 0
  Vec3 r1;  // on line 1
  double s0 = 0.0;
  double s1 = 0.0;
};

/// Mutually closest points of two non-parallel lines. With t = c0 - c1 and
/// n = m0 x m1 the line parameters are
///   s0 = n . (m1 x t) / |n|^2,   s1 = n . (m0 x t) / |n|^2.
inline ClosestPair closest_points_skew(const Line3D& line0, const Line3D& line1) {
  const Vec3& m0 = line0.direction;
  const Vec3& m1 = line1.direction;
  const Vec3 t = line0.origin - line1.origin;
  const Vec3 n = m0.cross(m1);
  const double nn = n.squaredNorm();
  if (std::sqrt(nn) < kParallelEpsilon) {
    throw GeometryError(ErrorCode::DegenerateRays, "lines are parallel");
  }
  ClosestPair pair;
  pair.s0 = n.dot(m1.cross(t)) / nn;
  pair.s1 = n.dot(m0.cross(t)) / nn;
  pair.r0 = line0.at(pair.s0);
  pair.r1 = line1.at(pair.s1);
  return pair;
}

/// Classic midpoint depths, (p.r / p.p, p.q / p.p). Signs are preserved; a
/// negative depth means the closest point lies behind that camera.
inline DepthPair depths_classic(const CrossTriple& triple) {
  const double pp = triple.p.squaredNorm();
  if (std::sqrt(pp) < kParallelEpsilon) {
    throw GeometryError(ErrorCode::DegenerateRays, "rays are parallel");
  }
  return {triple.p.dot(triple.r) / pp, triple.p.dot(triple.q) / pp};
}

inline TriangulationResult triangulate_mid_classic(const Bearing& f0, const Bearing& f1,
                                                   const RelativePose& pose) {
  const detail::UnitRays rays = detail::unit_rays(f0, f1, pose);
  const DepthPair depths = depths_classic(detail::cross_triple(rays, pose.t));
  TriangulationResult result;
  result.x1 = 0.5 * (pose.t + depths.lambda0 * rays.a + depths.lambda1 * rays.b);
  result.depths = depths;
  result.adequate = depths.lambda0 > 0.0 && depths.lambda1 > 0.0;
  result.method = Method::Mid;
  return result;
}

namespace detail {

inline constexpr double kRankTolerance = 1e-12;

using Mat34 = Eigen::Matrix<double, 3, 4>;
using Mat4 = Eigen::Matrix4d;

// Perspective-normalized image point when the bearing points forward.
inline Vec3 image_point(const Bearing& f) { return f.z() > 0.0 ? Vec3(f / f.z()) : f.normalized(); }

// Two rows per view of the homogeneous system A X = 0 with X in frame C1.
inline Mat4 dlt_design_matrix(const ObservationPair& obs, const RelativePose& pose) {
  Mat34 P0;
  P0.leftCols<3>() = pose.R.transpose();
  P0.col(3) = -pose.R.transpose() * pose.t;
  Mat34 P1 = Mat34::Zero();
  P1.leftCols<3>().setIdentity();

  const Vec3 g0 = image_point(obs.f0);
  const Vec3 g1 = image_point(obs.f1);
  Mat4 A;
  A.row(0) = g0.z() * P0.row(0) - g0.x() * P0.row(2);
  A.row(1) = g0.z() * P0.row(1) - g0.y() * P0.row(2);
  A.row(2) = g1.z() * P1.row(0) - g1.x() * P1.row(2);
  A.row(3) = g1.z() * P1.row(1) - g1.y() * P1.row(2);
  return A;
}

// Signed projections of the estimate onto each unit ray.
inline TriangulationResult result_from_point(const Vec3& x1, const ObservationPair& obs,
                                             const RelativePose& pose, Method method) {
  const UnitRays rays = unit_rays(obs.f0, obs.f1, pose);
  TriangulationResult result;
  result.x1 = x1;
  result.depths = {(x1 - pose.t).dot(rays.a), x1.dot(rays.b)};
  result.adequate = result.depths.lambda0 > 0.0 && result.depths.lambda1 > 0.0;
  result.method = method;
  return result;
}

}  // namespace detail

/// Homogeneous linear triangulation: the right singular vector of the smallest
/// singular value, dehomogenized.
inline TriangulationResult triangulate_dlt(const ObservationPair& obs, const RelativePose& pose) {
  const detail::Mat4 A = detail::dlt_design_matrix(obs, pose);
  Eigen::JacobiSVD<detail::Mat4> svd(A, Eigen::ComputeFullV);
  const Eigen::Vector4d& sv = svd.singularValues();
  if (!(sv(2) > detail::kRankTolerance * sv(0))) {
    throw GeometryError(ErrorCode::SolveFailure, "DLT design matrix is rank deficient");
  }
  const Eigen::Vector4d X = svd.matrixV().col(3);
  if (!(std::abs(X(3)) > detail::kRankTolerance * X.head<3>().norm())) {
    throw GeometryError(ErrorCode::SolveFailure, "DLT solution is at infinity");
  }
  return detail::result_from_point(X.head<3>() / X(3), obs, pose, Method::Dlt);
}

/// Inhomogeneous linear triangulation: fixes the homogeneous scale to 1 and
/// solves the 3x3 normal equations.
inline TriangulationResult triangulate_linls(const ObservationPair& obs, const RelativePose& pose) {
  const detail::Mat4 A = detail::dlt_design_matrix(obs, pose);
  const Eigen::Matrix<double, 4, 3> A3 = A.leftCols<3>();
  const Mat3 normal = A3.transpose() * A3;
  const Vec3 rhs = -A3.transpose() * A.col(3);
  const Eigen::LDLT<Mat3> ldlt(normal);
  if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > detail::kRankTolerance)) {
    throw GeometryError(ErrorCode::SolveFailure, "LinLS normal matrix is singular");
  }
  const Vec3 x1 = ldlt.solve(rhs);
  if (!x1.allFinite()) {
    throw GeometryError(ErrorCode::SolveFailure, "LinLS solution is not finite");
  }
  return detail::result_from_point(x1, obs, pose, Method::LinLs);
}

struct RefineOptions {
  int max_iterations = 20;
  double step_tolerance = 1e-14;  // relative to |theta|
};

struct RefineResult {
  TriangulationResult result;
  double initial_cost = 0.0;  // d0^2 + d1^2, pixels^2
  double final_cost = 0.0;
  int iterations = 0;  // accepted steps
  bool converged = false;
};

namespace detail {

struct ReprojectionSystem {
  Eigen::Vector4d residual;
  Eigen::Matrix<double, 4, 3> jacobian;
  double cost = 0.0;
  bool valid = false;  // ray 0 projection defined and forward
};

// Residuals K (x'/z' - f/f_z) for both views. The point is parameterized as
// x1 = (alpha, beta, 1) / rho, i.e. inverse depth anchored in camera 1, which
// keeps the cost smooth through rho = 0 (the point at infinity).
inline ReprojectionSystem reprojection_system(const Vec3& theta, const Vec3& g0, const Vec3& g1,
                                              const Intrinsics& K, const RelativePose& pose) {
  ReprojectionSystem sys;
  const Mat3 Rt = pose.R.transpose();
  const Vec3 h = Rt * (Vec3(theta.x(), theta.y(), 1.0) - theta.z() * pose.t);
  if (!(h.z() > 0.0)) return sys;

  const double iz = 1.0 / h.z();
  sys.residual(0) = K.fx * (h.x() * iz - g0.x());
  sys.residual(1) = K.fy * (h.y() * iz - g0.y());
  sys.residual(2) = K.fx * (theta.x() - g1.x());
  sys.residual(3) = K.fy * (theta.y() - g1.y());

  Eigen::Matrix<double, 2, 3> Jpi;
  Jpi << K.fx * iz, 0.0, -K.fx * h.x() * iz * iz, 0.0, K.fy * iz, -K.fy * h.y() * iz * iz;
  Mat3 dh;
  dh.col(0) = Rt.col(0);
  dh.col(1) = Rt.col(1);
  dh.col(2) = -Rt * pose.t;
  sys.jacobian.topRows<2>() = Jpi * dh;
  sys.jacobian.bottomRows<2>() << K.fx, 0.0, 0.0, 0.0, K.fy, 0.0;
  sys.cost = sys.residual.squaredNorm();
  sys.valid = std::isfinite(sys.cost);
  return sys;
}

}  // namespace detail

/// Levenberg-damped Gauss-Newton on d0^2 + d1^2. The damping starts at zero and
/// grows tenfold on every rejected step. A step is accepted when it lowers the
/// cost, or when the cost change is within rounding and the gradient norm
/// drops, so the returned cost never exceeds the initial one by more than
/// rounding. converged is false when the iteration budget ran out;
/// the last accepted iterate is still returned.
///
/// The point is iterated in inverse-depth form, so when the cost keeps falling
/// past infinity the result ends up behind both cameras and is marked
/// inadequate instead of drifting to an arbitrarily large depth.
inline RefineResult refine_l2(const TriangulationResult& init, const ObservationPair& obs,
                              const RelativePose& pose, const RefineOptions& options = {}) {
  if (!obs.intrinsics) throw std::invalid_argument("refine_l2 requires intrinsics");
  if (!(obs.f0.z() > 0.0) || !(obs.f1.z() > 0.0)) {
    throw std::invalid_argument("refine_l2 requires forward-facing bearings");
  }
  if (!(init.x1.z() > 0.0)) {
    throw GeometryError(ErrorCode::Undefined, "initial point is behind camera 1");
  }
  const Intrinsics& K = *obs.intrinsics;
  const Vec3 g0 = obs.f0 / obs.f0.z();
  const Vec3 g1 = obs.f1 / obs.f1.z();
  // Rounding bound on one residual, in pixels.
  const double residual_noise = 64.0 * std::numeric_limits<double>::epsilon() * std::max(K.fx, K.fy) *
                                (1.0 + std::max(g0.head<2>().lpNorm<Eigen::Infinity>(),
                                                g1.head<2>().lpNorm<Eigen::Infinity>()));

  Vec3 theta(init.x1.x() / init.x1.z(), init.x1.y() / init.x1.z(), 1.0 / init.x1.z());
  detail::ReprojectionSystem sys = detail::reprojection_system(theta, g0, g1, K, pose);
  if (!sys.valid) {
    throw GeometryError(ErrorCode::Undefined, "initial point is behind camera 0");
  }

  RefineResult out;
  out.initial_cost = sys.cost;
  auto gradient = [](const detail::ReprojectionSystem& s) -> Vec3 {
    return s.jacobian.transpose() * s.residual;
  };
  Vec3 g = gradient(sys);
  double damping = 0.0;
  for (int it = 0; it < options.max_iterations; ++it) {
    const Mat3 H = sys.jacobian.transpose() * sys.jacobian;
    Mat3 Hd = H;
    Hd.diagonal() += damping * H.diagonal();
    const Vec3 delta = Hd.ldlt().solve(-g);
    if (delta.allFinite() && delta.norm() <= options.step_tolerance * theta.norm()) {
      out.converged = true;
      break;
    }
    const Vec3 candidate = theta + delta;
    const detail::ReprojectionSystem next =
        delta.allFinite() ? detail::reprojection_system(candidate, g0, g1, K, pose)
                          : detail::ReprojectionSystem{};
    bool accept = next.valid && next.cost < sys.cost;
    const double cost_noise = 2.0 * sys.residual.norm() * residual_noise + residual_noise * residual_noise;
    if (next.valid && !accept && next.cost - sys.cost <= cost_noise) {
      accept = gradient(next).norm() < g.norm();
    }
    if (accept) {
      theta = candidate;
      sys = next;
      g = gradient(sys);
      ++out.iterations;
      damping = damping > 1e-9 ? damping / 10.0 : 0.0;
    } else {
      damping = damping > 0.0 ? damping * 10.0 : 1e-4;
    }
  }
  out.final_cost = sys.cost;
  const Vec3 x1 = Vec3(theta.x(), theta.y(), 1.0) / theta.z();
  out.result = detail::result_from_point(x1, obs, pose, Method::L2Iter);
  out.result.adequate = out.result.adequate && theta.z() > 0.0;
  return out;
}

/// The iterative L2 baseline as run by the benchmark: wMid2 followed by
/// refine_l2.
inline RefineResult triangulate_l2_iterative(const ObservationPair& obs, const RelativePose& pose,
                                             const RefineOptions& options = {}) {
  return refine_l2(triangulate_wmid2(obs.f0, obs.f1, pose), obs, pose, options);
}

}  // namespace twoview
