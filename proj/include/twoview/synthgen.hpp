#pragma once

// Synthetic two-view triangulation problems.
//
// For every (camera configuration, cloud distance d, pixel noise sigma) cell a
// point cloud centred at (0, 0, d) is drawn, both camera poses are jittered,
// and each point is projected into both images with Gaussian pixel noise.
// Points that project behind a camera or outside the image (before noise) are
// dropped and counted.
//
// Random streams (see philox.hpp) are keyed by the dataset seed and
//   {cell index, point index, kCloudTag}   cloud point
//   {cell index, camera index, kPoseTag}   pose jitter
//   {cell index, point index, kNoiseTag}   pixel noise (view 0 then view 1)
// so the output does not depend on how cells are scheduled across threads.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "twoview/geometry.hpp"
#include "twoview/philox.hpp"
#include "twoview/tsv.hpp"

namespace twoview {

enum class CameraConfig { Orbital, Lateral, Forward, Diagonal };

inline constexpr std::array<CameraConfig, 4> kAllConfigs = {
    CameraConfig::Orbital, CameraConfig::Lateral, CameraConfig::Forward, CameraConfig::Diagonal};

inline constexpr std::string_view config_name(CameraConfig c) {
  switch (c) {
    case CameraConfig::Orbital: return "orbital";
    case CameraConfig::Lateral: return "lateral";
    case CameraConfig::Forward: return "forward";
    case CameraConfig::Diagonal: return "diagonal";
  }
  return "?";
}

inline CameraConfig parse_config(std::string_view name) {
  for (CameraConfig c : kAllConfigs) {
    if (config_name(c) == name) return c;
  }
  throw GeometryError(ErrorCode::UnknownConfig, std::string(name));
}

struct SceneConfig {
  CameraConfig config = CameraConfig::Orbital;
  double d = 1.0;
  double sigma = 1.0;
  std::size_t n_points = 5000;
  std::uint64_t seed = 42;
  double image_size = 1024.0;
  double focal = 512.0;
  double pose_noise = 0.01;

  Intrinsics intrinsics() const { return {focal, focal, image_size / 2.0, image_size / 2.0}; }
};

struct Problem {
  std::uint64_t id = 0;
  CameraConfig config = CameraConfig::Orbital;
  double d = 0.0;
  double sigma = 0.0;
  RelativePose pose;
  ObservationPair obs;
  Vec3 x_true = Vec3::Zero();  // frame C1
  double beta_true = 0.0;
};

/// World-to-camera transforms, x_cam = R * x_world + t.
struct CameraPair {
  RelativePose cam0;
  RelativePose cam1;
};

inline constexpr std::uint32_t kCloudTag = 1;
inline constexpr std::uint32_t kPoseTag = 2;
inline constexpr std::uint32_t kNoiseTag = 3;

/// One cloud point: |N(0, (d/4)^2)| along a uniformly random direction.
inline Vec3 sample_cloud_point(double d, PhiloxStream& rng) {
  const double radius = std::abs(rng.normal(0.0, d / 4.0));
  const double z = 2.0 * rng.uniform() - 1.0;
  const double phi = 2.0 * std::numbers::pi * rng.uniform();
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  return Vec3(0.0, 0.0, d) + radius * Vec3(s * std::cos(phi), s * std::sin(phi), z);
}

inline std::vector<Vec3> generate_cloud(double d, std::size_t n_points, std::uint64_t seed,
                                        std::uint32_t cell = 0) {
  if (!(d > 0.0)) throw std::invalid_argument("generate_cloud: d must be positive");
  std::vector<Vec3> points;
  points.reserve(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    PhiloxStream rng(seed, cell, static_cast<std::uint32_t>(i), kCloudTag);
    points.push_back(sample_cloud_point(d, rng));
  }
  return points;
}

/// Camera at `center` with optical axis `axis`, image y axis completed from the
/// world up vector (0, 1, 0).
inline RelativePose look_along(const Vec3& center, const Vec3& axis) {
  const Vec3 z = axis.normalized();
  const Vec3 x = Vec3::UnitY().cross(z).normalized();
  const Vec3 y = z.cross(x);
  RelativePose pose;
  pose.R.row(0) = x;
  pose.R.row(1) = y;
  pose.R.row(2) = z;
  pose.t = -pose.R * center;
  return pose;
}

inline CameraPair camera_config(CameraConfig config, double d) {
  const Vec3 target(0.0, 0.0, d);
  auto aimed = [&](const Vec3& c) {
    const Vec3 axis = target - c;
    // A camera sitting on the cloud center keeps looking down +z.
    return look_along(c, axis.norm() > 1e-12 ? axis : Vec3::UnitZ());
  };
  switch (config) {
    case CameraConfig::Orbital:
      return {aimed({-0.5, 0.0, 0.0}), aimed({0.5, 0.0, 0.0})};
    case CameraConfig::Lateral:
      return {look_along({-0.5, 0.0, 0.0}, Vec3::UnitZ()), look_along({0.5, 0.0, 0.0}, Vec3::UnitZ())};
    case CameraConfig::Forward:
      return {aimed({0.0, 0.0, -0.5}), aimed({0.0, 0.0, 0.5})};
    case CameraConfig::Diagonal: {
      const double k = std::sqrt(3.0) / 6.0;
      return {look_along({-k, -k, -k}, Vec3::UnitZ()), look_along({k, k, k}, Vec3::UnitZ())};
    }
  }
  throw GeometryError(ErrorCode::UnknownConfig, "camera_config");
}

/// Adds U(0, width) to each translation component and left-multiplies the
/// rotation by Rz(c) Ry(b) Rx(a) with a, b, c ~ U(0, width).
inline RelativePose perturb_pose(const RelativePose& pose, PhiloxStream& rng, double width = 0.01) {
  Vec3 dt;
  for (int i = 0; i < 3; ++i) dt(i) = rng.uniform(0.0, width);
  std::array<double, 3> angle{};
  for (double& a : angle) a = rng.uniform(0.0, width);
  const Mat3 dR = (Eigen::AngleAxisd(angle[2], Vec3::UnitZ()) *
                   Eigen::AngleAxisd(angle[1], Vec3::UnitY()) *
                   Eigen::AngleAxisd(angle[0], Vec3::UnitX()))
                      .toRotationMatrix();
  RelativePose out;
  out.R = orthonormalize(dR * pose.R);
  out.t = pose.t + dt;
  return out;
}

/// Relative pose mapping camera-0 coordinates into camera 1.
inline RelativePose relative_pose(const CameraPair& cams) {
  RelativePose rel;
  rel.R = cams.cam1.R * cams.cam0.R.transpose();
  rel.t = cams.cam1.t - rel.R * cams.cam0.t;
  return rel;
}

/// Pixel projection plus N(0, sigma^2) noise on u and v. std::nullopt when the
/// point is behind the camera or its noise-free projection leaves
/// [0, image_size)^2; no noise is drawn in that case.
inline std::optional<Vec2> project_and_noise(const Vec3& x_world, const RelativePose& camera,
                                             const Intrinsics& K, double sigma, double image_size,
                                             PhiloxStream& rng) {
  const Vec3 xc = camera.apply(x_world);
  if (!(xc.z() > 0.0)) return std::nullopt;
  const Vec2 u = K.project(xc);
  if (!(u.x() >= 0.0 && u.x() < image_size && u.y() >= 0.0 && u.y() < image_size)) {
    return std::nullopt;
  }
  const double nu = rng.normal();
  const double nv = rng.normal();
  return Vec2(u.x() + sigma * nu, u.y() + sigma * nv);
}

struct DatasetGrid {
  std::vector<CameraConfig> configs{kAllConfigs.begin(), kAllConfigs.end()};
  std::vector<double> d_values{0.5, 1, 2, 4, 8, 16, 32, 64};
  std::vector<double> sigmas{1, 2, 3, 4, 5, 6, 7, 8};
  std::size_t n_points = 200;
  std::uint64_t seed = 42;
  double image_size = 1024.0;
  double focal = 512.0;
  double pose_noise = 0.01;
  unsigned workers = 1;

  Intrinsics intrinsics() const { return {focal, focal, image_size / 2.0, image_size / 2.0}; }
  std::size_t cell_count() const { return configs.size() * d_values.size() * sigmas.size(); }
};

struct Dataset {
  std::vector<Problem> problems;
  std::size_t rejected = 0;  // cloud points not visible in both views
};

namespace detail {

struct CellOutput {
  std::vector<Problem> problems;
  std::size_t rejected = 0;
};

inline CellOutput build_cell(const DatasetGrid& grid, std::uint32_t cell, CameraConfig config,
                             double d, double sigma) {
  const Intrinsics K = grid.intrinsics();
  CameraPair cams = camera_config(config, d);
  PhiloxStream pose_rng0(grid.seed, cell, 0, kPoseTag);
  PhiloxStream pose_rng1(grid.seed, cell, 1, kPoseTag);
  cams.cam0 = perturb_pose(cams.cam0, pose_rng0, grid.pose_noise);
  cams.cam1 = perturb_pose(cams.cam1, pose_rng1, grid.pose_noise);
  const RelativePose rel = relative_pose(cams);

  CellOutput out;
  const std::vector<Vec3> cloud = generate_cloud(d, grid.n_points, grid.seed, cell);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    PhiloxStream noise(grid.seed, cell, static_cast<std::uint32_t>(i), kNoiseTag);
    const auto u0 = project_and_noise(cloud[i], cams.cam0, K, sigma, grid.image_size, noise);
    const auto u1 = u0 ? project_and_noise(cloud[i], cams.cam1, K, sigma, grid.image_size, noise)
                       : std::nullopt;
    if (!u0 || !u1) {
      ++out.rejected;
      continue;
    }
    Problem p;
    p.config = config;
    p.d = d;
    p.sigma = sigma;
    p.pose = rel;
    p.obs.u0 = *u0;
    p.obs.u1 = *u1;
    p.obs.f0 = backproject(*u0, K);
    p.obs.f1 = backproject(*u1, K);
    p.obs.intrinsics = K;
    p.x_true = cams.cam1.apply(cloud[i]);
    p.beta_true = angle_between_lines(p.x_true, p.x_true - rel.t);
    out.problems.push_back(std::move(p));
  }
  return out;
}

}  // namespace detail

/// Cells are enumerated config-major, then d, then sigma. Problem ids are
/// assigned in that order after all cells finish.
inline Dataset build_dataset(const DatasetGrid& grid) {
  struct Cell {
    CameraConfig config;
    double d;
    double sigma;
  };
  std::vector<Cell> cells;
  for (CameraConfig c : grid.configs)
    for (double d : grid.d_values)
      for (double s : grid.sigmas) cells.push_back({c, d, s});

  std::vector<detail::CellOutput> outputs(cells.size());
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < cells.size(); i += stride) {
      outputs[i] = detail::build_cell(grid, static_cast<std::uint32_t>(i), cells[i].config,
                                      cells[i].d, cells[i].sigma);
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(grid.workers, cells.size()));
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
  }

  Dataset ds;
  for (auto& out : outputs) {
    ds.rejected += out.rejected;
    for (auto& p : out.problems) {
      p.id = ds.problems.size();
      ds.problems.push_back(std::move(p));
    }
  }
  return ds;
}

// --- dataset file -----------------------------------------------------------

inline constexpr std::string_view kDatasetHeader =
    "id\tconfig\td\tsigma\tR00\tR01\tR02\tR10\tR11\tR12\tR20\tR21\tR22\tt0\tt1\tt2\t"
    "f0x\tf0y\tf0z\tf1x\tf1y\tf1z\tu0x\tu0y\tu1x\tu1y\tx_true_x\tx_true_y\tx_true_z\tbeta_true";

inline std::string format_dataset(const std::vector<Problem>& problems) {
  std::string out(kDatasetHeader);
  out += '\n';
  tsv::RowWriter row(out);
  for (const Problem& p : problems) {
    row << p.id << config_name(p.config) << p.d << p.sigma;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) row << p.pose.R(r, c);
    for (int i = 0; i < 3; ++i) row << p.pose.t(i);
    for (int i = 0; i < 3; ++i) row << p.obs.f0(i);
    for (int i = 0; i < 3; ++i) row << p.obs.f1(i);
    row << p.obs.u0.x() << p.obs.u0.y() << p.obs.u1.x() << p.obs.u1.y();
    for (int i = 0; i < 3; ++i) row << p.x_true(i);
    row << p.beta_true;
    row.end_row();
  }
  return out;
}

/// Parses a dataset file. The file does not carry intrinsics; `K` is attached
/// to every observation.
inline std::vector<Problem> parse_dataset(std::istream& in, const Intrinsics& K) {
  std::string line;
  if (!std::getline(in, line) || line != kDatasetHeader) {
    throw std::runtime_error("dataset: missing or unexpected header line");
  }
  std::vector<Problem> problems;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = tsv::split(line);
    if (f.size() != 30) {
      throw std::runtime_error("dataset: line " + std::to_string(line_no) + " has " +
                               std::to_string(f.size()) + " fields, expected 30");
    }
    Problem p;
    p.id = tsv::parse_uint(f[0]);
    p.config = parse_config(f[1]);
    p.d = tsv::parse_double(f[2]);
    p.sigma = tsv::parse_double(f[3]);
    std::size_t k = 4;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) p.pose.R(r, c) = tsv::parse_double(f[k++]);
    for (int i = 0; i < 3; ++i) p.pose.t(i) = tsv::parse_double(f[k++]);
    for (int i = 0; i < 3; ++i) p.obs.f0(i) = tsv::parse_double(f[k++]);
    for (int i = 0; i < 3; ++i) p.obs.f1(i) = tsv::parse_double(f[k++]);
    p.obs.u0 = {tsv::parse_double(f[k]), tsv::parse_double(f[k + 1])};
    p.obs.u1 = {tsv::parse_double(f[k + 2]), tsv::parse_double(f[k + 3])};
    k += 4;
    for (int i = 0; i < 3; ++i) p.x_true(i) = tsv::parse_double(f[k++]);
    p.beta_true = tsv::parse_double(f[k]);
    p.obs.intrinsics = K;
    problems.push_back(std::move(p));
  }
  return problems;
}

}  // namespace twoview
