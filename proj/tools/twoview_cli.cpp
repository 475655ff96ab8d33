// twoview: generate synthetic two-view triangulation datasets, run methods on
// them, aggregate the errors and time the kernels.
//
// Exit codes: 0 success, 2 bad flags, 3 IO error, 4 unknown method.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "twoview/twoview.hpp"

namespace {

constexpr int kExitBadFlags = 2;
constexpr int kExitIo = 3;
constexpr int kExitUnknownMethod = 4;

struct CliError : std::runtime_error {
  CliError(int code, const std::string& what) : std::runtime_error(what), exit_code(code) {}
  int exit_code;
};

/// "a..b" (inclusive integer range) or a comma-separated list of numbers.
std::vector<double> parse_values(const std::string& text, const std::string& flag) {
  std::vector<double> values;
  try {
    if (const auto dots = text.find(".."); dots != std::string::npos) {
      const long lo = std::stol(text.substr(0, dots));
      const long hi = std::stol(text.substr(dots + 2));
      if (hi < lo) throw std::invalid_argument("empty range");
      for (long v = lo; v <= hi; ++v) values.push_back(static_cast<double>(v));
    } else {
      for (const auto field : twoview::tsv::split(text, ',')) {
        values.push_back(twoview::tsv::parse_double(field));
      }
    }
  } catch (const std::exception&) {
    throw CliError(kExitBadFlags, "invalid value for " + flag + ": '" + text + "'");
  }
  if (values.empty()) throw CliError(kExitBadFlags, "empty value for " + flag);
  return values;
}

std::vector<twoview::Method> parse_methods(const std::string& text) {
  std::vector<twoview::Method> methods;
  for (const auto field : twoview::tsv::split(text, ',')) {
    const auto m = twoview::parse_method(field);
    if (!m) throw CliError(kExitUnknownMethod, "unknown method '" + std::string(field) + "'");
    methods.push_back(*m);
  }
  return methods;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError(kExitIo, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !out.write(content.data(), static_cast<std::streamsize>(content.size()))) {
    throw CliError(kExitIo, "cannot write '" + path + "'");
  }
}

struct CameraFlags {
  double focal = 512.0;
  double image_size = 1024.0;

  void add(CLI::App* cmd) {
    cmd->add_option("--focal", focal, "Focal length in pixels")->capture_default_str();
    cmd->add_option("--image-size", image_size, "Square image side in pixels")->capture_default_str();
  }
  twoview::Intrinsics intrinsics() const {
    return {focal, focal, image_size / 2.0, image_size / 2.0};
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-view triangulation benchmark"};
  app.require_subcommand(1);

  // generate
  std::string gen_config = "all";
  std::string gen_d;
  std::string gen_d_exponents;
  std::string gen_sigma = "1..8";
  std::size_t gen_points = 200;
  std::uint64_t seed = 42;
  std::string gen_out;
  unsigned workers = 1;
  double pose_noise = 0.01;
  CameraFlags gen_camera;
  auto* generate = app.add_subcommand("generate", "Write a synthetic dataset");
  generate->add_option("--config", gen_config, "all or comma list of orbital,lateral,forward,diagonal")
      ->capture_default_str();
  auto* d_opt = generate->add_option("--d", gen_d, "Cloud distances (list or a..b)");
  generate->add_option("--d-exponents", gen_d_exponents, "Exponents n of d = 2^n (default -1..6)")
      ->excludes(d_opt);
  generate->add_option("--sigma", gen_sigma, "Pixel noise levels (list or a..b)")->capture_default_str();
  generate->add_option("--points", gen_points, "Points per cloud")->capture_default_str();
  generate->add_option("--seed", seed, "Random seed")->capture_default_str();
  generate->add_option("--out", gen_out, "Output dataset file")->required();
  generate->add_option("--workers", workers, "Worker threads")->capture_default_str();
  generate->add_option("--pose-noise", pose_noise, "Width of the uniform pose jitter")->capture_default_str();
  gen_camera.add(generate);

  // run
  std::string run_in, run_out;
  std::string methods_flag = "mid,mid2,wmid2,dlt,linls,l2it";
  CameraFlags run_camera;
  auto* run = app.add_subcommand("run", "Triangulate every problem of a dataset");
  run->add_option("--in", run_in, "Dataset file")->required();
  run->add_option("--out", run_out, "Per-problem results file")->required();
  run->add_option("--methods", methods_flag, "Comma list of methods")->capture_default_str();
  run->add_option("--workers", workers, "Worker threads")->capture_default_str();
  run_camera.add(run);

  // report
  std::string rep_in, rep_out;
  std::string bins_flag = "0,2,4,90";
  std::string norm_flag = "l2";
  auto* report = app.add_subcommand("report", "Aggregate a results file into CSV");
  report->add_option("--in", rep_in, "Results file")->required();
  report->add_option("--out", rep_out, "Report CSV (stdout when omitted)");
  report->add_option("--bins", bins_flag, "Raw-parallax bin edges in degrees")->capture_default_str();
  report->add_option("--norm", norm_flag, "2D norm of the e2d columns: l1, l2 or linf")
      ->check(CLI::IsMember({"l1", "l2", "linf"}))
      ->capture_default_str();

  // bench
  std::size_t bench_points = 1000000;
  int reps = 5;
  std::string bench_out;
  auto* bench = app.add_subcommand("bench", "Time the triangulation kernels");
  bench->add_option("--points", bench_points, "Batch size")->capture_default_str();
  bench->add_option("--reps", reps, "Timed repetitions (median reported)")
      ->check(CLI::Range(1, 1000))
      ->capture_default_str();
  bench->add_option("--seed", seed, "Random seed")->capture_default_str();
  bench->add_option("--methods", methods_flag, "Comma list of methods")->capture_default_str();
  bench->add_option("--out", bench_out, "Timing CSV (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitBadFlags;
  }

  try {
    if (*generate) {
      twoview::DatasetGrid grid;
      grid.configs.clear();
      if (gen_config == "all") {
        grid.configs.assign(twoview::kAllConfigs.begin(), twoview::kAllConfigs.end());
      } else {
        for (const auto name : twoview::tsv::split(gen_config, ',')) {
          try {
            grid.configs.push_back(twoview::parse_config(name));
          } catch (const twoview::GeometryError&) {
            throw CliError(kExitBadFlags, "unknown camera config '" + std::string(name) + "'");
          }
        }
      }
      if (!gen_d.empty()) {
        grid.d_values = parse_values(gen_d, "--d");
      } else {
        grid.d_values.clear();
        for (double n : parse_values(gen_d_exponents.empty() ? "-1..6" : gen_d_exponents, "--d-exponents")) {
          grid.d_values.push_back(std::ldexp(1.0, static_cast<int>(n)));
        }
      }
      for (double d : grid.d_values) {
        if (!(d > 0.0)) throw CliError(kExitBadFlags, "--d values must be positive");
      }
      grid.sigmas = parse_values(gen_sigma, "--sigma");
      for (double s : grid.sigmas) {
        if (!(s >= 0.0)) throw CliError(kExitBadFlags, "--sigma values must be non-negative");
      }
      grid.n_points = gen_points;
      grid.seed = seed;
      grid.workers = workers;
      grid.pose_noise = pose_noise;
      grid.focal = gen_camera.focal;
      grid.image_size = gen_camera.image_size;

      const twoview::Dataset ds = twoview::build_dataset(grid);
      const std::string text = twoview::format_dataset(ds.problems);
      write_output(gen_out, text);
      std::fprintf(stderr, "generated %zu problems (%zu points rejected), digest %016llx\n",
                   ds.problems.size(), ds.rejected,
                   static_cast<unsigned long long>(twoview::tsv::fnv1a64(text)));
    } else if (*run) {
      const auto methods = parse_methods(methods_flag);
      std::istringstream in(read_file(run_in));
      std::vector<twoview::Problem> problems;
      try {
        problems = twoview::parse_dataset(in, run_camera.intrinsics());
      } catch (const std::runtime_error& e) {
        throw CliError(kExitIo, run_in + ": " + e.what());
      }
      const auto rows = twoview::run_methods(problems, methods, workers);
      write_output(run_out, twoview::format_results(rows));
      std::fprintf(stderr, "wrote %zu result rows\n", rows.size());
    } else if (*report) {
      const auto edges = parse_values(bins_flag, "--bins");
      if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end())) {
        throw CliError(kExitBadFlags, "--bins must list at least two ascending edges");
      }
      std::istringstream in(read_file(rep_in));
      std::vector<twoview::ResultRow> rows;
      try {
        rows = twoview::parse_results(in);
      } catch (const std::runtime_error& e) {
        throw CliError(kExitIo, rep_in + ": " + e.what());
      }
      const auto aggregates = twoview::aggregate(rows, edges);
      write_output(rep_out, twoview::format_report(aggregates, *twoview::parse_norm(norm_flag)));
    } else if (*bench) {
      const auto methods = parse_methods(methods_flag);
      twoview::DatasetGrid grid;
      grid.seed = seed;
      const twoview::BenchBatch batch = twoview::make_bench_batch(bench_points, grid);
      std::vector<twoview::TimingRow> rows;
      double sink = 0.0;
      for (twoview::Method m : methods) rows.push_back(twoview::time_method(m, batch, reps, sink));
      write_output(bench_out, twoview::format_timings(rows));
      std::fprintf(stderr, "checksum %g\n", sink);
    }
  } catch (const CliError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
