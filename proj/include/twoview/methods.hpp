#pragma once

#include "twoview/baselines.hpp"
#include "twoview/midpoint.hpp"
#include "twoview/triangulation.hpp"

namespace twoview {

/// Runs one triangulation method. Throws GeometryError on degenerate input.
inline TriangulationResult triangulate(Method method, const ObservationPair& obs,
                                       const RelativePose& pose) {
  switch (method) {
    case Method::Mid: return triangulate_mid_classic(obs.f0, obs.f1, pose);
    case Method::Mid2: return triangulate_mid2(obs.f0, obs.f1, pose);
    case Method::WMid2: return triangulate_wmid2(obs.f0, obs.f1, pose);
    case Method::Dlt: return triangulate_dlt(obs, pose);
    case Method::LinLs: return triangulate_linls(obs, pose);
    case Method::L2Iter: return triangulate_l2_iterative(obs, pose).result;
  }
  throw std::invalid_argument("unknown method");
}

}  // namespace twoview
