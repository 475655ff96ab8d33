// Triangulates one noisy correspondence with every method and prints the
// errors against the ground truth.

#include <cstdio>

#include "twoview/twoview.hpp"

int main() {
  using namespace twoview;

  const Intrinsics K(512, 512, 512, 512);
  RelativePose pose;
  pose.R = Eigen::AngleAxisd(0.02, Vec3::UnitY()).toRotationMatrix();
  pose.t = Vec3(-1.0, 0.0, 0.0);

  const Vec3 x0(0.3, -0.2, 20.0);  // low parallax, about 3 degrees
  const Vec3 x1 = pose.apply(x0);

  ObservationPair obs;
  obs.intrinsics = K;
  obs.u0 = K.project(x0) + Vec2(0.8, -0.5);
  obs.u1 = K.project(x1) + Vec2(-0.6, 0.7);
  obs.f0 = backproject(obs.u0, K);
  obs.f1 = backproject(obs.u1, K);

  const double beta_true = angle_between_lines(x1, x1 - pose.t);
  std::printf("%-6s %10s %10s %10s %9s\n", "method", "e3d", "e2d(L2)", "beta_err", "adequate");
  for (Method m : kAllMethods) {
    const TriangulationResult r = triangulate(m, obs, pose);
    const ErrorRecord e = evaluate(r, obs, pose, x1, beta_true);
    std::printf("%-6s %10.4f %10.4f %10.4f %9s\n", std::string(method_name(m)).c_str(), e.e3d,
                e.e_l2, degrees(e.beta_err), e.adequate ? "yes" : "no");
  }
}
