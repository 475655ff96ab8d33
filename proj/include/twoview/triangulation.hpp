#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "twoview/geometry.hpp"

namespace twoview {

enum class Method { Mid, Mid2, WMid2, Dlt, LinLs, L2Iter };

inline constexpr std::array<Method, 6> kAllMethods = {Method::Mid,  Method::Mid2,  Method::WMid2,
                                                      Method::Dlt,  Method::LinLs, Method::L2Iter};

inline constexpr std::string_view method_name(Method m) {
  switch (m) {
    case Method::Mid: return "mid";
    case Method::Mid2: return "mid2";
    case Method::WMid2: return "wmid2";
    case Method::Dlt: return "dlt";
    case Method::LinLs: return "linls";
    case Method::L2Iter: return "l2it";
  }
  return "?";
}

inline std::optional<Method> parse_method(std::string_view name) {
  for (Method m : kAllMethods) {
    if (method_name(m) == name) return m;
  }
  return std::nullopt;
}

/// Depths along ray 0 (from camera 0) and ray 1 (from camera 1).
struct DepthPair {
  double lambda0 = 0.0;
  double lambda1 = 0.0;
};

struct TriangulationResult {
  Vec3 x1 = Vec3::Zero();  // estimate in frame C1
  DepthPair depths;
  bool adequate = false;
  Method method = Method::Mid;
};

/// Generalized weighted midpoint: the weighted average of the point at depth
/// lambda0 on ray 0 (t + lambda0 * a) and the point at depth lambda1 on ray 1
/// (lambda1 * b). a = R f0^ and b = f1^ must be unit vectors in frame C1.
inline Vec3 weighted_midpoint(const Vec3& t, const Vec3& a, const Vec3& b, const DepthPair& d,
                              double weight0, double weight1) {
  return (weight0 * (t + d.lambda0 * a) + weight1 * (d.lambda1 * b)) / (weight0 + weight1);
}

}  // namespace twoview
