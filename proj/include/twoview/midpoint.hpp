#pragma once

// Alternative midpoint triangulation.
//
// Depths along the two rays come from the sine rule applied to the triangle
// (camera 0, camera 1, point), which is exact when the rays intersect and is
// used unchanged for skew rays. With a = R f0^, b = f1^ (unit, frame C1):
//
//   p = a x b,  q = a x t,  r = b x t
//   lambda0 = |r| / |p|,  lambda1 = |q| / |p|
//
// Mid2 returns the plain midpoint of t + lambda0 a and lambda1 b. wMid2
// weights the two points by inverse depth, which collapses to
//
//   x1 = |q| / (|q| + |r|) * (t + |r| / |p| * (a + b)).
//
// Both depths are non-negative by construction, so a sign check cannot reject
// behind-camera solutions. adequacy_test() instead asks whether flipping the
// sign of either depth brings the two ray points closer together.

#include "twoview/geometry.hpp"
#include "twoview/triangulation.hpp"

namespace twoview {

struct CrossTriple {
  Vec3 p;  // R f0^ x f1^
  Vec3 q;  // R f0^ x t
  Vec3 r;  // f1^ x t
};

namespace detail {

struct UnitRays {
  Vec3 a;  // R f0^, frame C1
  Vec3 b;  // f1^, frame C1
};

inline UnitRays unit_rays(const Bearing& f0, const Bearing& f1, const RelativePose& pose) {
  return {pose.R * f0.normalized(), f1.normalized()};
}

inline CrossTriple cross_triple(const UnitRays& rays, const Vec3& t) {
  return {rays.a.cross(rays.b), rays.a.cross(t), rays.b.cross(t)};
}

// Expanded form of the four squared distances |t + s0 lambda0 a + s1 lambda1 b|^2.
// The (+lambda0, -lambda1) combination must be strictly the smallest.
inline bool adequate(const UnitRays& rays, const Vec3& t, const DepthPair& d) {
  const double ta = d.lambda0 * t.dot(rays.a);
  const double tb = d.lambda1 * t.dot(rays.b);
  const double ab = d.lambda0 * d.lambda1 * rays.a.dot(rays.b);
  return tb + ab > 0.0 && ta < ab && ta < tb;
}

}  // namespace detail

inline CrossTriple cross_triple(const Bearing& f0, const Bearing& f1, const RelativePose& pose) {
  return detail::cross_triple(detail::unit_rays(f0, f1, pose), pose.t);
}

/// Sine-rule depths. Throws DegenerateRays for (near-)parallel rays.
inline DepthPair depths_alt(const CrossTriple& triple) {
  const double p_norm = triple.p.norm();
  if (p_norm < kParallelEpsilon) {
    throw GeometryError(ErrorCode::DegenerateRays, "rays are parallel");
  }
  return {triple.r.norm() / p_norm, triple.q.norm() / p_norm};
}

/// Returns false when the correspondence should be discarded. Ties count as
/// inadequate.
inline bool adequacy_test(const DepthPair& depths, const Bearing& f0, const Bearing& f1,
                          const RelativePose& pose) {
  return detail::adequate(detail::unit_rays(f0, f1, pose), pose.t, depths);
}

inline TriangulationResult triangulate_mid2(const Bearing& f0, const Bearing& f1,
                                            const RelativePose& pose) {
  const detail::UnitRays rays = detail::unit_rays(f0, f1, pose);
  const DepthPair depths = depths_alt(detail::cross_triple(rays, pose.t));
  TriangulationResult result;
  result.x1 = 0.5 * (pose.t + depths.lambda0 * rays.a + depths.lambda1 * rays.b);
  result.depths = depths;
  result.adequate = detail::adequate(rays, pose.t, depths);
  result.method = Method::Mid2;
  return result;
}

/// Inverse-depth weighted midpoint. Throws DegenerateRays for parallel rays and
/// DegenerateWeights when both rays are parallel to the baseline. If only one
/// depth is zero the limit of the weighting is returned (the zero-depth ray
/// point) and the result is marked inadequate.
inline TriangulationResult triangulate_wmid2(const Bearing& f0, const Bearing& f1,
                                             const RelativePose& pose) {
  const detail::UnitRays rays = detail::unit_rays(f0, f1, pose);
  const CrossTriple triple = detail::cross_triple(rays, pose.t);
  const double p_norm = triple.p.norm();
  if (p_norm < kParallelEpsilon) {
    throw GeometryError(ErrorCode::DegenerateRays, "rays are parallel");
  }
  const double q_norm = triple.q.norm();
  const double r_norm = triple.r.norm();
  if (q_norm + r_norm <= kParallelEpsilon * pose.t.norm()) {
    throw GeometryError(ErrorCode::DegenerateWeights, "both rays are parallel to the baseline");
  }
  TriangulationResult result;
  result.depths = {r_norm / p_norm, q_norm / p_norm};
  result.x1 = (q_norm / (q_norm + r_norm)) * (pose.t + result.depths.lambda0 * (rays.a + rays.b));
  result.adequate = detail::adequate(rays, pose.t, result.depths);
  result.method = Method::WMid2;
  return result;
}

}  // namespace twoview
