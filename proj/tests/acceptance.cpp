// Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails. Every tolerance is a named constant below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "test_support.hpp"
#include "twoview/twoview.hpp"

namespace {

using namespace twoview;
namespace tt = twoview::testing;

// C1
constexpr int kDominanceInstances = 1'000'000;
constexpr double kDominanceSlack = 1e-12;
constexpr double kDominanceSeconds = 10.0;
// C2
constexpr int kRecoveryInstances = 100'000;
constexpr double kRecoveryPointTol = 1e-8;
constexpr double kRecoveryDepthTol = 1e-9;
// C3
constexpr int kSkewInstances = 100'000;
constexpr double kSkewParamTol = 1e-10;
constexpr double kSkewPerpTol = 1e-10;
// C4
constexpr int kCheiralityInstances = 100'000;
// C5
constexpr int kDualFormInstances = 100'000;
constexpr double kDualFormTol = 1e-12;
constexpr double kSegmentTol = 1e-12;
// C6
constexpr int kEquivarianceInstances = 100'000;
constexpr double kRotationTol = 1e-10;
constexpr double kScaleTol = 1e-12;
constexpr double kRescaleTol = 1e-12;
// C7, C8
constexpr std::uint64_t kDeskSeed = 42;
constexpr std::size_t kDeskPoints = 200;
constexpr double kHighParallaxSpread = 0.10;
// C9
constexpr double kImpactSpotTol = 1e-3;
// C10
constexpr std::size_t kBenchPoints = 1'000'000;
constexpr int kBenchRepetitions = 5;
constexpr double kRefineSpeedup = 5.0;

int failures = 0;

void report(const char* id, bool pass, const std::string& what, const std::string& detail) {
  std::printf("%s %s %s: %s\n", pass ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
  failures += pass ? 0 : 1;
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double scale_of(const Vec3& x) { return std::max(1.0, x.norm()); }

// Random pose and two random unit bearings with non-parallel rays.
struct RandomPair {
  RelativePose pose;
  Bearing f0;
  Bearing f1;
};

RandomPair random_pair(tt::Rng& rng) {
  while (true) {
    RandomPair r{tt::random_pose(rng), tt::random_unit(rng), tt::random_unit(rng)};
    if ((r.pose.R * r.f0).cross(r.f1).norm() > 1e-6) return r;
  }
}

void c1_depth_dominance() {
  tt::Rng rng(101);
  const auto start = std::chrono::steady_clock::now();
  int violations = 0;
  for (int i = 0; i < kDominanceInstances; ++i) {
    const RandomPair r = random_pair(rng);
    const CrossTriple c = cross_triple(r.f0, r.f1, r.pose);
    const DepthPair alt = depths_alt(c);
    const DepthPair mid = depths_classic(c);
    if (alt.lambda0 < mid.lambda0 - kDominanceSlack * alt.lambda0 ||
        alt.lambda1 < mid.lambda1 - kDominanceSlack * alt.lambda1) {
      ++violations;
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report("C1", violations == 0 && secs < kDominanceSeconds, "depth dominance",
         fmt("%d violations in %d instances, %.2f s", violations, kDominanceInstances, secs));
}

void c2_exact_recovery() {
  tt::Rng rng(102);
  std::map<Method, double> worst;
  double worst_depth = 0.0;
  int failures_here = 0;
  const Method methods[] = {Method::Mid, Method::Mid2, Method::WMid2, Method::Dlt, Method::LinLs};
  for (int i = 0; i < kRecoveryInstances; ++i) {
    const tt::ExactInstance in = tt::random_exact_instance(rng);
    ObservationPair obs;
    obs.f0 = in.f0;
    obs.f1 = in.f1;
    for (Method m : methods) {
      try {
        const TriangulationResult r = triangulate(m, obs, in.pose);
        const double e = (r.x1 - in.x1).norm() / in.x1.norm();
        worst[m] = std::max(worst[m], e);
        if (!(e < kRecoveryPointTol)) ++failures_here;
        if (m == Method::Mid2 || m == Method::WMid2) {
          const double d0 = std::abs(r.depths.lambda0 - in.x0.norm()) / in.x0.norm();
          const double d1 = std::abs(r.depths.lambda1 - in.x1.norm()) / in.x1.norm();
          worst_depth = std::max({worst_depth, d0, d1});
          if (!(d0 < kRecoveryDepthTol && d1 < kRecoveryDepthTol)) ++failures_here;
        }
      } catch (const GeometryError&) {
        ++failures_here;
      }
    }
  }
  std::string detail;
  for (Method m : methods) detail += fmt("%s %.1e, ", std::string(method_name(m)).c_str(), worst[m]);
  detail += fmt("depths %.1e", worst_depth);
  report("C2", failures_here == 0, "exact-intersection recovery", detail);
}

void c3_closest_pair_oracle() {
  tt::Rng rng(103);
  double worst_param = 0.0, worst_perp = 0.0;
  for (int i = 0; i < kSkewInstances; ++i) {
    const Vec3 c0 = 3.0 * tt::random_unit(rng);
    const Vec3 c1 = 3.0 * tt::random_unit(rng);
    const Vec3 m0 = tt::random_unit(rng);
    const Vec3 m1 = tt::random_unit(rng);
    if (m0.cross(m1).norm() < 1e-3) {
      --i;
      continue;
    }
    const ClosestPair c = closest_points_skew(Line3D(c0, m0), Line3D(c1, m1));
    const Eigen::Vector2d s = tt::closest_params_normal_equations(c0, m0, c1, m1);
    worst_param = std::max({worst_param, std::abs(c.s0 - s(0)), std::abs(c.s1 - s(1))});
    const Vec3 gap = c.r1 - c.r0;
    worst_perp = std::max({worst_perp, std::abs(gap.dot(m0)), std::abs(gap.dot(m1))});
  }
  report("C3", worst_param < kSkewParamTol && worst_perp < kSkewPerpTol, "closest points on skew lines",
         fmt("max parameter deviation %.1e, max perpendicular dot %.1e", worst_param, worst_perp));
}

void c4_adequacy_is_cheirality() {
  tt::Rng rng(104);
  std::normal_distribution<double> noise(0.0, 1e-3);
  int disagreements = 0, behind = 0;
  for (int i = 0; i < kCheiralityInstances; ++i) {
    Bearing f0, f1;
    RelativePose pose;
    if (i % 2 == 0) {
      // Intersection pushed behind one or both cameras by flipping rays, then
      // made skew with a small perturbation.
      const tt::ExactInstance in = tt::random_exact_instance(rng);
      pose = in.pose;
      const int flip = i % 8 / 2;
      f0 = (flip & 1 ? -1.0 : 1.0) * in.f0.normalized();
      f1 = (flip & 2 ? -1.0 : 1.0) * in.f1.normalized();
      f0 += Vec3(noise(rng), noise(rng), noise(rng));
      f1 += Vec3(noise(rng), noise(rng), noise(rng));
    } else {
      const RandomPair r = random_pair(rng);
      pose = r.pose;
      f0 = r.f0;
      f1 = r.f1;
    }
    const TriangulationResult mid = triangulate_mid_classic(f0, f1, pose);
    const bool adequate = adequacy_test({std::abs(mid.depths.lambda0), std::abs(mid.depths.lambda1)},
                                        f0, f1, pose);
    const ClosestPair c = closest_points_skew(Line3D(pose.t, pose.R * f0), Line3D(Vec3::Zero(), f1));
    const bool in_front = c.s0 > 0.0 && c.s1 > 0.0;
    behind += !in_front;
    if (adequate != in_front || mid.adequate != in_front) ++disagreements;
  }
  report("C4", disagreements == 0, "adequacy equals cheirality for the classic midpoint",
         fmt("%d disagreements in %d instances (%d behind a camera)", disagreements,
             kCheiralityInstances, behind));
}

void c5_dual_form_and_segment() {
  tt::Rng rng(105);
  double worst_form = 0.0, worst_bary = 0.0, worst_off = 0.0;
  for (int i = 0; i < kDualFormInstances; ++i) {
    const RandomPair r = random_pair(rng);
    const TriangulationResult w = triangulate_wmid2(r.f0, r.f1, r.pose);
    const Vec3 p0 = r.pose.t + w.depths.lambda0 * (r.pose.R * r.f0);
    const Vec3 p1 = w.depths.lambda1 * r.f1;
    const double w0 = 1.0 / w.depths.lambda0, w1 = 1.0 / w.depths.lambda1;
    const Vec3 weighted = (w0 * p0 + w1 * p1) / (w0 + w1);
    const double scale = std::max({1.0, p0.norm(), p1.norm()});
    worst_form = std::max(worst_form, (w.x1 - weighted).norm() / scale);
    const Vec3 seg = p1 - p0;
    const double s = (w.x1 - p0).dot(seg) / seg.squaredNorm();
    worst_bary = std::max({worst_bary, -s, s - 1.0});
    worst_off = std::max(worst_off, (p0 + s * seg - w.x1).norm() / scale);
  }
  report("C5", worst_form < kDualFormTol && worst_bary <= kSegmentTol && worst_off < kSegmentTol,
         "weighted midpoint forms agree and lie on the segment",
         fmt("form gap %.1e, barycentric excess %.1e, off-segment %.1e", worst_form,
             std::max(0.0, worst_bary), worst_off));
}

void c6_equivariance() {
  tt::Rng rng(106);
  using Fn = TriangulationResult (*)(const Bearing&, const Bearing&, const RelativePose&);
  const std::pair<const char*, Fn> methods[] = {
      {"mid", &triangulate_mid_classic}, {"mid2", &triangulate_mid2}, {"wmid2", &triangulate_wmid2}};
  double worst_rot = 0.0, worst_scale = 0.0, worst_rescale = 0.0;
  for (int i = 0; i < kEquivarianceInstances; ++i) {
    const RandomPair r = random_pair(rng);
    const Mat3 S = tt::random_rotation(rng);
    const double k = tt::uniform(rng, 0.01, 100.0);
    const double k0 = tt::uniform(rng, 0.01, 100.0), k1 = tt::uniform(rng, 0.01, 100.0);
    RelativePose rotated;
    rotated.R = S * r.pose.R * S.transpose();
    rotated.t = S * r.pose.t;
    RelativePose scaled = r.pose;
    scaled.t *= k;
    for (const auto& [name, fn] : methods) {
      const Vec3 x = fn(r.f0, r.f1, r.pose).x1;
      const double sc = scale_of(x);
      worst_rot = std::max(worst_rot, (fn(S * r.f0, S * r.f1, rotated).x1 - S * x).norm() / sc);
      worst_scale = std::max(worst_scale, (fn(r.f0, r.f1, scaled).x1 - k * x).norm() / (k * sc));
      worst_rescale = std::max(worst_rescale, (fn(k0 * r.f0, k1 * r.f1, r.pose).x1 - x).norm() / sc);
    }
  }
  report("C6", worst_rot < kRotationTol && worst_scale < kScaleTol && worst_rescale < kRescaleTol,
         "equivariance of mid, mid2, wmid2",
         fmt("rotation %.1e, baseline scale %.1e, bearing rescale %.1e", worst_rot, worst_scale,
             worst_rescale));
}

const AggregateRow* find_bin(const std::vector<AggregateRow>& agg, Method m, double lo) {
  for (const AggregateRow& a : agg) {
    if (a.kind == GroupKind::Parallax && a.method == m && a.bin_lo_deg == lo) return &a;
  }
  return nullptr;
}

void c7_c8_desk_scale() {
  DatasetGrid grid;
  grid.seed = kDeskSeed;
  grid.n_points = kDeskPoints;
  const auto start = std::chrono::steady_clock::now();
  const Dataset ds = build_dataset(grid);
  const std::vector<Method> methods(kAllMethods.begin(), kAllMethods.end());
  const auto agg = aggregate(run_methods(ds.problems, methods), kDefaultBinsDeg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("     desk-scale dataset: %zu problems, %zu points rejected, %.1f s\n", ds.problems.size(),
              ds.rejected, secs);

  std::map<Method, const AggregateRow*> low, high;
  bool complete = true;
  for (Method m : methods) {
    low[m] = find_bin(agg, m, 0.0);
    high[m] = find_bin(agg, m, 4.0);
    complete = complete && low[m] && high[m];
  }
  if (!complete) {
    report("C7", false, "low-parallax ordering", "missing parallax bin");
    report("C8", false, "high-parallax equivalence", "missing parallax bin");
    return;
  }
  const Norm norms[] = {Norm::L1, Norm::L2, Norm::Linf};
  auto e3d = [&](Method m) { return low[m]->e3d.mean; };
  auto e2d = [&](Method m, Norm n) { return low[m]->e2d(n).mean; };

  const bool a = std::max(e3d(Method::Mid2), e3d(Method::WMid2)) <=
                 std::min(e3d(Method::L2Iter), e3d(Method::Dlt));
  const bool b = low[Method::Mid]->over_freq > low[Method::Mid2]->over_freq &&
                 low[Method::Mid]->over_mean_deg > low[Method::Mid2]->over_mean_deg;
  bool c = true, d = true;
  for (Norm n : norms) {
    c = c && e2d(Method::WMid2, n) <= e2d(Method::Mid2, n);
    d = d && e2d(Method::Mid, n) > e2d(Method::WMid2, n) && e2d(Method::LinLs, n) > e2d(Method::WMid2, n);
  }
  report("C7a", a, "low-parallax 3D error: mid2, wmid2 <= l2it, dlt",
         fmt("mid2 %.4g, wmid2 %.4g, l2it %.4g, dlt %.4g", e3d(Method::Mid2), e3d(Method::WMid2),
             e3d(Method::L2Iter), e3d(Method::Dlt)));
  report("C7b", b, "low-parallax overestimation: mid above mid2",
         fmt("freq %.4f vs %.4f, mean %.4f deg vs %.4f deg", low[Method::Mid]->over_freq,
             low[Method::Mid2]->over_freq, low[Method::Mid]->over_mean_deg,
             low[Method::Mid2]->over_mean_deg));
  report("C7c", c, "low-parallax 2D error: wmid2 <= mid2 in l1, l2, linf",
         fmt("wmid2 %.4g/%.4g/%.4g, mid2 %.4g/%.4g/%.4g", e2d(Method::WMid2, Norm::L1),
             e2d(Method::WMid2, Norm::L2), e2d(Method::WMid2, Norm::Linf), e2d(Method::Mid2, Norm::L1),
             e2d(Method::Mid2, Norm::L2), e2d(Method::Mid2, Norm::Linf)));
  report("C7d", d, "low-parallax 2D error: mid, linls above wmid2 in l1, l2, linf",
         fmt("mid %.4g/%.4g/%.4g, linls %.4g/%.4g/%.4g", e2d(Method::Mid, Norm::L1),
             e2d(Method::Mid, Norm::L2), e2d(Method::Mid, Norm::Linf), e2d(Method::LinLs, Norm::L1),
             e2d(Method::LinLs, Norm::L2), e2d(Method::LinLs, Norm::Linf)));

  double lo = kInfinity, hi = 0.0;
  std::string detail;
  for (Method m : methods) {
    const double v = high[m]->e3d.mean;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    detail += fmt("%s %.4g, ", std::string(method_name(m)).c_str(), v);
  }
  const double spread = (hi - lo) / lo;
  detail += fmt("spread %.2f%%", 100.0 * spread);
  report("C8", spread <= kHighParallaxSpread, "high-parallax 3D errors within 10%", detail);
}

void c9_relative_impact() {
  bool above_one = true, monotone = true;
  double prev = kInfinity;
  for (int deg = 2; deg <= 90; ++deg) {
    const double v = relative_impact(radians(deg), radians(0.5));
    above_one = above_one && v > 1.0;
    monotone = monotone && v <= prev;
    prev = v;
  }
  // Direct evaluation through tan, independent of the library's cot.
  auto direct = [](double beta_deg) {
    const double b = radians(beta_deg), dl = radians(0.5);
    const double base = 1.0 / std::tan(b / 2);
    return std::abs((1.0 / std::tan((b - dl) / 2) - base) / (1.0 / std::tan((b + dl) / 2) - base));
  };
  const double v10 = relative_impact(radians(10.0)), v90 = relative_impact(radians(90.0));
  const bool spots = std::abs(v10 - direct(10.0)) < kImpactSpotTol &&
                     std::abs(v90 - direct(90.0)) < kImpactSpotTol &&
                     std::abs(v10 - 1.105) < kImpactSpotTol && std::abs(v90 - 1.008) < kImpactSpotTol;
  report("C9", above_one && monotone && spots, "relative impact curve",
         fmt("above one %s, non-increasing %s, f(10 deg) %.6f, f(90 deg) %.6f", above_one ? "yes" : "no",
             monotone ? "yes" : "no", v10, v90));
}

void c10_throughput() {
  DatasetGrid grid;
  grid.seed = kDeskSeed;
  const BenchBatch batch = make_bench_batch(kBenchPoints, grid);
  double sink = 0.0;
  std::map<Method, double> pps;
  for (Method m : {Method::Mid, Method::Mid2, Method::WMid2, Method::L2Iter}) {
    pps[m] = time_method(m, batch, kBenchRepetitions, sink).points_per_second;
  }
  const bool pass = pps[Method::Mid] > pps[Method::Mid2] && pps[Method::Mid2] > pps[Method::WMid2] &&
                    pps[Method::WMid2] >= kRefineSpeedup * pps[Method::L2Iter];
  report("C10", pass, "throughput ordering mid > mid2 > wmid2 >= 5x l2it",
         fmt("median points/s over %d runs of %zu: mid %.3g, mid2 %.3g, wmid2 %.3g, l2it %.3g "
             "(checksum %g)",
             kBenchRepetitions, kBenchPoints, pps[Method::Mid], pps[Method::Mid2], pps[Method::WMid2],
             pps[Method::L2Iter], sink));
}

}  // namespace

int main() {
  c1_depth_dominance();
  c2_exact_recovery();
  c3_closest_pair_oracle();
  c4_adequacy_is_cheirality();
  c5_dual_form_and_segment();
  c6_equivariance();
  c7_c8_desk_scale();
  c9_relative_impact();
  c10_throughput();
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
