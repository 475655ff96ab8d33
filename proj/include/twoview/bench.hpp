#pragma once

// Evaluation harness: per-problem error records, grouped aggregates and
// kernel throughput.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "twoview/methods.hpp"
#include "twoview/metrics.hpp"
#include "twoview/synthgen.hpp"
#include "twoview/tsv.hpp"

namespace twoview {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct ResultRow {
  std::uint64_t id = 0;
  CameraConfig config = CameraConfig::Orbital;
  double d = 0.0;
  double sigma = 0.0;
  ErrorRecord record;
};

/// Runs `method` on `problem`. Degenerate inputs produce a non-adequate row
/// with NaN errors.
inline ResultRow evaluate_problem(const Problem& problem, Method method) {
  ResultRow row;
  row.id = problem.id;
  row.config = problem.config;
  row.d = problem.d;
  row.sigma = problem.sigma;
  try {
    const TriangulationResult result = triangulate(method, problem.obs, problem.pose);
    row.record = evaluate(result, problem.obs, problem.pose, problem.x_true, problem.beta_true);
  } catch (const GeometryError&) {
    ErrorRecord& rec = row.record;
    rec.method = method;
    rec.adequate = false;
    rec.e3d = rec.d0 = rec.d1 = rec.e_l1 = rec.e_l2 = rec.e_linf = kNaN;
    rec.beta_est = rec.beta_err = rec.beta_signed = kNaN;
    rec.beta_raw = raw_parallax(problem.obs.f0, problem.obs.f1, problem.pose);
    rec.beta_true = problem.beta_true;
  }
  return row;
}

/// Rows are ordered by problem, then by the order of `methods`, independent of
/// the worker count.
inline std::vector<ResultRow> run_methods(const std::vector<Problem>& problems,
                                          const std::vector<Method>& methods, unsigned workers = 1) {
  const std::size_t m = methods.size();
  std::vector<ResultRow> rows(problems.size() * m);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      for (std::size_t k = 0; k < m; ++k) rows[i * m + k] = evaluate_problem(problems[i], methods[k]);
  };
  workers = std::max(1u, std::min<unsigned>(workers, std::max<std::size_t>(problems.size(), 1)));
  if (workers == 1) {
    work(0, problems.size());
  } else {
    const std::size_t chunk = (problems.size() + workers - 1) / workers;
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(problems.size(), w * chunk);
      const std::size_t end = std::min(problems.size(), begin + chunk);
      pool.emplace_back(work, begin, end);
    }
  }
  return rows;
}

// --- results file -----------------------------------------------------------

inline constexpr std::string_view kResultsHeader =
    "id\tconfig\td\tsigma\tmethod\tadequate\te3d\td0\td1\te_l1\te_l2\te_linf\t"
    "beta_raw_deg\tbeta_true_deg\tbeta_est_deg\tbeta_signed_err_deg";

inline std::string format_results(const std::vector<ResultRow>& rows) {
  std::string out(kResultsHeader);
  out += '\n';
  tsv::RowWriter w(out);
  for (const ResultRow& r : rows) {
    const ErrorRecord& e = r.record;
    w << r.id << config_name(r.config) << r.d << r.sigma << method_name(e.method) << e.adequate
      << e.e3d << e.d0 << e.d1 << e.e_l1 << e.e_l2 << e.e_linf << degrees(e.beta_raw)
      << degrees(e.beta_true) << degrees(e.beta_est) << degrees(e.beta_signed);
    w.end_row();
  }
  return out;
}

/// Inverse of format_results. Angles come back in radians.
inline std::vector<ResultRow> parse_results(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader) {
    throw std::runtime_error("results: missing or unexpected header line");
  }
  std::vector<ResultRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = tsv::split(line);
    if (f.size() != 16) {
      throw std::runtime_error("results: line " + std::to_string(line_no) + " has " +
                               std::to_string(f.size()) + " fields, expected 16");
    }
    ResultRow r;
    r.id = tsv::parse_uint(f[0]);
    r.config = parse_config(f[1]);
    r.d = tsv::parse_double(f[2]);
    r.sigma = tsv::parse_double(f[3]);
    ErrorRecord& e = r.record;
    const auto method = parse_method(f[4]);
    if (!method) throw std::runtime_error("results: unknown method '" + std::string(f[4]) + "'");
    e.method = *method;
    e.adequate = f[5] == "1";
    e.e3d = tsv::parse_double(f[6]);
    e.d0 = tsv::parse_double(f[7]);
    e.d1 = tsv::parse_double(f[8]);
    e.e_l1 = tsv::parse_double(f[9]);
    e.e_l2 = tsv::parse_double(f[10]);
    e.e_linf = tsv::parse_double(f[11]);
    e.beta_raw = radians(tsv::parse_double(f[12]));
    e.beta_true = radians(tsv::parse_double(f[13]));
    e.beta_est = radians(tsv::parse_double(f[14]));
    e.beta_signed = radians(tsv::parse_double(f[15]));
    e.beta_err = std::abs(e.beta_signed);
    rows.push_back(r);
  }
  return rows;
}

// --- aggregation ------------------------------------------------------------

/// Mean and median of the finite entries.
struct Summary {
  double mean = kNaN;
  double median = kNaN;
  std::size_t count = 0;
};

inline Summary summarize(std::vector<double> values) {
  std::erase_if(values, [](double v) { return !std::isfinite(v); });
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) {
    s.median = upper;
  } else {
    const double lower = *std::max_element(values.begin(), values.begin() + mid);
    s.median = 0.5 * (lower + upper);
  }
  return s;
}

enum class GroupKind { Sigma, Parallax };

struct AggregateRow {
  GroupKind kind = GroupKind::Sigma;
  Method method = Method::Mid;
  double sigma = kNaN;       // Sigma groups
  double bin_lo_deg = kNaN;  // Parallax groups, raw parallax in [lo, hi)
  double bin_hi_deg = kNaN;

  std::size_t n_total = 0;
  std::size_t n = 0;           // adequate results
  std::size_t n_rejected = 0;  // adequacy / cheirality rejections
  std::size_t n_behind = 0;    // adequate but reprojection behind a camera

  Summary e3d;
  Summary e_l1;
  Summary e_l2;
  Summary e_linf;
  Summary beta_err_deg;

  // Signed parallax error split, over adequate rows with a defined estimate.
  double over_freq = 0.0;
  double under_freq = 0.0;
  double tie_freq = 0.0;
  double over_mean_deg = kNaN;
  double under_mean_deg = kNaN;

  const Summary& e2d(Norm norm) const {
    switch (norm) {
      case Norm::L1: return e_l1;
      case Norm::L2: return e_l2;
      case Norm::Linf: return e_linf;
    }
    return e_l2;
  }
};

namespace detail {

inline AggregateRow aggregate_group(const std::vector<const ResultRow*>& rows) {
  AggregateRow a;
  std::vector<double> e3d, l1, l2, linf, berr;
  std::size_t over = 0, under = 0, tie = 0;
  double over_sum = 0.0, under_sum = 0.0;
  for (const ResultRow* r : rows) {
    const ErrorRecord& e = r->record;
    ++a.n_total;
    if (!e.adequate) {
      ++a.n_rejected;
      continue;
    }
    ++a.n;
    if (!std::isfinite(e.e_l1)) ++a.n_behind;
    e3d.push_back(e.e3d);
    l1.push_back(e.e_l1);
    l2.push_back(e.e_l2);
    linf.push_back(e.e_linf);
    const double s = degrees(e.beta_signed);
    if (std::isfinite(s)) {
      berr.push_back(std::abs(s));
      if (s > 0.0) {
        ++over;
        over_sum += s;
      } else if (s < 0.0) {
        ++under;
        under_sum += -s;
      } else {
        ++tie;
      }
    }
  }
  a.e3d = summarize(std::move(e3d));
  a.e_l1 = summarize(std::move(l1));
  a.e_l2 = summarize(std::move(l2));
  a.e_linf = summarize(std::move(linf));
  a.beta_err_deg = summarize(std::move(berr));
  const double total = static_cast<double>(over + under + tie);
  if (total > 0) {
    a.over_freq = over / total;
    a.under_freq = under / total;
    a.tie_freq = tie / total;
  }
  if (over > 0) a.over_mean_deg = over_sum / over;
  if (under > 0) a.under_mean_deg = under_sum / under;
  return a;
}

}  // namespace detail

inline const std::vector<double> kDefaultBinsDeg = {0.0, 2.0, 4.0, 90.0};

/// Index of the raw-parallax bin containing `beta_deg`; the last bin is closed.
inline std::optional<std::size_t> parallax_bin(double beta_deg, const std::vector<double>& edges) {
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    const bool last = b + 2 == edges.size();
    if (beta_deg >= edges[b] && (beta_deg < edges[b + 1] || (last && beta_deg <= edges[b + 1]))) {
      return b;
    }
  }
  return std::nullopt;
}

/// Groups by (method, sigma) and by (method, raw-parallax bin). Groups with no
/// adequate result are omitted.
inline std::vector<AggregateRow> aggregate(const std::vector<ResultRow>& rows,
                                           const std::vector<double>& bin_edges_deg = kDefaultBinsDeg) {
  if (bin_edges_deg.size() < 2 || !std::is_sorted(bin_edges_deg.begin(), bin_edges_deg.end())) {
    throw std::invalid_argument("bin edges must be an ascending list of at least two values");
  }
  std::vector<AggregateRow> out;
  for (Method method : kAllMethods) {
    std::map<double, std::vector<const ResultRow*>> by_sigma;
    std::vector<std::vector<const ResultRow*>> by_bin(bin_edges_deg.size() - 1);
    bool present = false;
    for (const ResultRow& r : rows) {
      if (r.record.method != method) continue;
      present = true;
      by_sigma[r.sigma].push_back(&r);
      if (const auto b = parallax_bin(degrees(r.record.beta_raw), bin_edges_deg)) by_bin[*b].push_back(&r);
    }
    if (!present) continue;
    for (const auto& [sigma, group] : by_sigma) {
      AggregateRow a = detail::aggregate_group(group);
      if (a.n == 0) continue;
      a.kind = GroupKind::Sigma;
      a.method = method;
      a.sigma = sigma;
      out.push_back(a);
    }
    for (std::size_t b = 0; b < by_bin.size(); ++b) {
      AggregateRow a = detail::aggregate_group(by_bin[b]);
      if (a.n == 0) continue;
      a.kind = GroupKind::Parallax;
      a.method = method;
      a.bin_lo_deg = bin_edges_deg[b];
      a.bin_hi_deg = bin_edges_deg[b + 1];
      out.push_back(a);
    }
  }
  return out;
}

inline std::string format_report(const std::vector<AggregateRow>& rows, Norm norm = Norm::L2) {
  std::string out =
      "group,method,sigma,bin_lo_deg,bin_hi_deg,n_total,n,n_rejected,rejection_rate,n_behind,"
      "mean_e3d,median_e3d,mean_e2d,median_e2d,mean_e_l1,median_e_l1,mean_e_l2,median_e_l2,"
      "mean_e_linf,median_e_linf,mean_beta_err_deg,median_beta_err_deg,over_freq,over_mean_deg,"
      "under_freq,under_mean_deg,tie_freq\n";
  auto num = [](double v) { return tsv::format_double(v); };
  for (const AggregateRow& a : rows) {
    const Summary& e2d = a.e2d(norm);
    out += a.kind == GroupKind::Sigma ? "sigma" : "parallax";
    out += ',' + std::string(method_name(a.method));
    out += ',' + (a.kind == GroupKind::Sigma ? num(a.sigma) : std::string());
    out += ',' + (a.kind == GroupKind::Parallax ? num(a.bin_lo_deg) : std::string());
    out += ',' + (a.kind == GroupKind::Parallax ? num(a.bin_hi_deg) : std::string());
    out += ',' + std::to_string(a.n_total) + ',' + std::to_string(a.n) + ',' +
           std::to_string(a.n_rejected);
    out += ',' + num(static_cast<double>(a.n_rejected) / static_cast<double>(a.n_total));
    out += ',' + std::to_string(a.n_behind);
    for (const Summary* s : {&a.e3d, &e2d, &a.e_l1, &a.e_l2, &a.e_linf, &a.beta_err_deg}) {
      out += ',' + num(s->mean) + ',' + num(s->median);
    }
    out += ',' + num(a.over_freq) + ',' + num(a.over_mean_deg) + ',' + num(a.under_freq) + ',' +
           num(a.under_mean_deg) + ',' + num(a.tie_freq);
    out += '\n';
  }
  return out;
}

// --- throughput -------------------------------------------------------------

struct BenchBatch {
  struct Item {
    Bearing f0;
    Bearing f1;
    std::uint32_t pose = 0;
  };
  std::vector<RelativePose> poses;
  std::vector<Item> items;
  Intrinsics intrinsics;
};

/// Tiles the problems of `grid` until `size` items exist.
inline BenchBatch make_bench_batch(std::size_t size, const DatasetGrid& grid) {
  const Dataset ds = build_dataset(grid);
  if (ds.problems.empty()) throw std::invalid_argument("benchmark grid produced no problems");
  BenchBatch batch;
  batch.intrinsics = grid.intrinsics();
  // Problems of one cell share a pose; keep one copy per distinct pose.
  std::vector<std::uint32_t> pose_of(ds.problems.size());
  for (std::size_t i = 0; i < ds.problems.size(); ++i) {
    const RelativePose& p = ds.problems[i].pose;
    if (batch.poses.empty() || batch.poses.back().R != p.R || batch.poses.back().t != p.t) {
      batch.poses.push_back(p);
    }
    pose_of[i] = static_cast<std::uint32_t>(batch.poses.size() - 1);
  }
  batch.items.reserve(size);
  for (std::size_t i = 0; i < size; ++i) {
    const std::size_t k = i % ds.problems.size();
    batch.items.push_back({ds.problems[k].obs.f0, ds.problems[k].obs.f1, pose_of[k]});
  }
  return batch;
}

struct TimingRow {
  Method method = Method::Mid;
  double points_per_second = 0.0;  // median over repetitions
  std::size_t batch_size = 0;
  int repetitions = 0;
  std::vector<double> per_repetition;
};

namespace detail {

template <typename Kernel>
double time_pass(const BenchBatch& batch, Kernel&& kernel, double& sink) {
  const auto start = std::chrono::steady_clock::now();
  double acc = 0.0;
  for (const BenchBatch::Item& item : batch.items) {
    try {
      const TriangulationResult r = kernel(item, batch.poses[item.pose]);
      acc += r.x1.x() + (r.adequate ? 1.0 : 0.0);
    } catch (const GeometryError&) {
      acc -= 1.0;
    }
  }
  const auto stop = std::chrono::steady_clock::now();
  sink += acc;
  return std::chrono::duration<double>(stop - start).count();
}

}  // namespace detail

/// Single-threaded kernel timing, no IO. Each repetition processes the whole
/// batch; the median rate is reported.
inline TimingRow time_method(Method method, const BenchBatch& batch, int repetitions, double& sink) {
  const Intrinsics K = batch.intrinsics;
  auto obs_of = [&K](const BenchBatch::Item& it) {
    ObservationPair obs;
    obs.f0 = it.f0;
    obs.f1 = it.f1;
    obs.intrinsics = K;
    return obs;
  };
  auto run = [&](auto&& kernel) { return detail::time_pass(batch, kernel, sink); };
  auto pass = [&]() -> double {
    using Item = BenchBatch::Item;
    switch (method) {
      case Method::Mid:
        return run([](const Item& it, const RelativePose& p) { return triangulate_mid_classic(it.f0, it.f1, p); });
      case Method::Mid2:
        return run([](const Item& it, const RelativePose& p) { return triangulate_mid2(it.f0, it.f1, p); });
      case Method::WMid2:
        return run([](const Item& it, const RelativePose& p) { return triangulate_wmid2(it.f0, it.f1, p); });
      case Method::Dlt:
        return run([&](const Item& it, const RelativePose& p) { return triangulate_dlt(obs_of(it), p); });
      case Method::LinLs:
        return run([&](const Item& it, const RelativePose& p) { return triangulate_linls(obs_of(it), p); });
      case Method::L2Iter:
        return run([&](const Item& it, const RelativePose& p) {
          return triangulate_l2_iterative(obs_of(it), p).result;
        });
    }
    return 0.0;
  };

  TimingRow row;
  row.method = method;
  row.batch_size = batch.items.size();
  row.repetitions = repetitions;
  pass();  // warm-up
  for (int i = 0; i < repetitions; ++i) {
    row.per_repetition.push_back(static_cast<double>(batch.items.size()) / pass());
  }
  std::vector<double> sorted = row.per_repetition;
  std::sort(sorted.begin(), sorted.end());
  row.points_per_second = sorted[sorted.size() / 2];
  return row;
}

inline std::string format_timings(const std::vector<TimingRow>& rows) {
  std::string out = "method,points_per_second,batch_size,repetitions\n";
  for (const TimingRow& r : rows) {
    out += std::string(method_name(r.method)) + ',' + tsv::format_double(r.points_per_second) + ',' +
           std::to_string(r.batch_size) + ',' + std::to_string(r.repetitions) + '\n';
  }
  return out;
}

}  // namespace twoview
