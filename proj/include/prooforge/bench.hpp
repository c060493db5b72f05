#pragma once

// Original-vs-compiled benchmarking with an equivalence gate.

#include "prooforge/compiler.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>

namespace prooforge {

struct BenchCase {
  std::string name;
  Term config;
};

struct BenchOptions {
  std::size_t repetitions = 5;
  std::size_t fuel = 10000;
};

struct BenchRecord {
  std::string name;
  std::size_t steps_original = 0;
  std::size_t steps_compiled = 0;
  double wall_original = 0;  // seconds, median of repetitions
  double wall_compiled = 0;
  double speedup = 0;
  double delta_steps = 0;
  bool equivalent = true;
  std::string detail;  // why the runs disagree
};

enum class Verdict { Win, Tie, Loss };

/// Speedups within 1% of 1.0 are ties.
inline Verdict classify(double speedup) {
  if (speedup > 1.01) return Verdict::Win;
  if (speedup < 0.99) return Verdict::Loss;
  return Verdict::Tie;
}

struct BenchSummary {
  double geomean = 0;
  double median = 0;
  double p90 = 0;
  std::size_t wins = 0, ties = 0, losses = 0;
  double mean_delta_steps = 0;
};

struct BenchReport {
  std::vector<BenchRecord> records;
  /// Absent when any program's runs disagree.
  std::optional<BenchSummary> summary;
  std::size_t equivalence_failures = 0;
};

inline double median_of(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of an empty sample");
  std::sort(v.begin(), v.end());
  std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2;
}

/// Nearest-rank percentile, q in (0, 1].
inline double percentile(std::vector<double> v, double q) {
  if (v.empty()) throw std::invalid_argument("percentile of an empty sample");
  std::sort(v.begin(), v.end());
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
  return v[std::clamp<std::size_t>(rank, 1, v.size()) - 1];
}

inline BenchSummary summarize(const std::vector<BenchRecord>& records) {
  if (records.empty()) throw std::invalid_argument("no benchmark records");
  BenchSummary s;
  std::vector<double> speedups;
  double log_sum = 0, delta_sum = 0;
  for (const auto& r : records) {
    speedups.push_back(r.speedup);
    log_sum += std::log(r.speedup);
    delta_sum += r.delta_steps;
    switch (classify(r.speedup)) {
      case Verdict::Win:
        ++s.wins;
        break;
      case Verdict::Tie:
        ++s.ties;
        break;
      case Verdict::Loss:
        ++s.losses;
        break;
    }
  }
  const auto n = static_cast<double>(records.size());
  s.geomean = std::exp(log_sum / n);
  s.median = median_of(speedups);
  s.p90 = percentile(speedups, 0.9);
  s.mean_delta_steps = delta_sum / n;
  return s;
}

namespace bench_detail {
inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline std::pair<RunResult, double> timed_run(const Semantics& sem, const Term& cfg, const BenchOptions& opt) {
  std::vector<double> times;
  std::optional<RunResult> first;
  for (std::size_t i = 0; i < opt.repetitions; ++i) {
    auto t0 = std::chrono::steady_clock::now();
    RunResult r = run_concrete(sem, cfg, opt.fuel);
    times.push_back(seconds_since(t0));
    if (!first) first = std::move(r);
  }
  return {std::move(*first), median_of(times)};
}
}  // namespace bench_detail

/// Runs every case under both semantics. Timing runs are sequential.
inline BenchReport run_bench(const Semantics& original, const Semantics& compiled, const std::vector<BenchCase>& cases,
                             const BenchOptions& opt = {}) {
  if (cases.empty()) throw std::invalid_argument("benchmark corpus is empty");
  if (opt.repetitions == 0) throw std::invalid_argument("repetitions must be positive");
  BenchReport report;
  for (const auto& c : cases) {
    auto [ro, wo] = bench_detail::timed_run(original, c.config, opt);
    auto [rc, wc] = bench_detail::timed_run(compiled, c.config, opt);
    BenchRecord rec;
    rec.name = c.name;
    rec.steps_original = ro.steps;
    rec.steps_compiled = rc.steps;
    rec.wall_original = wo;
    rec.wall_compiled = wc;
    rec.speedup = wc > 0 ? wo / wc : 1.0;
    rec.delta_steps = ro.steps ? delta_steps(ro.steps, rc.steps) : 0.0;
    if (ro.status != rc.status) {
      rec.equivalent = false;
      rec.detail = "one run exhausted its fuel";
    } else if (ro.final != rc.final) {
      rec.equivalent = false;
      rec.detail = "final configurations differ";
    }
    report.equivalence_failures += !rec.equivalent;
    report.records.push_back(std::move(rec));
  }
  if (report.equivalence_failures == 0) report.summary = summarize(report.records);
  return report;
}

/// One JSON object per line with a fixed field order: a record per test,
/// then a summary line. Timing fields are omitted when `timing` is false.
inline std::string report_lines(const BenchReport& report, bool timing = true) {
  using J = nlohmann::ordered_json;
  std::string out;
  for (const auto& r : report.records) {
    J j;
    j["type"] = "test";
    j["name"] = r.name;
    j["steps_original"] = r.steps_original;
    j["steps_compiled"] = r.steps_compiled;
    j["delta_steps"] = r.delta_steps;
    if (timing) {
      j["wall_original"] = r.wall_original;
      j["wall_compiled"] = r.wall_compiled;
      j["speedup"] = r.speedup;
    }
    j["equivalent"] = r.equivalent;
    if (!r.equivalent) j["detail"] = r.detail;
    out += j.dump() + "\n";
  }
  J s;
  s["type"] = "summary";
  s["tests"] = report.records.size();
  s["equivalence_failures"] = report.equivalence_failures;
  if (report.summary) {
    s["mean_delta_steps"] = report.summary->mean_delta_steps;
    if (timing) {
      s["geomean_speedup"] = report.summary->geomean;
      s["median_speedup"] = report.summary->median;
      s["p90_speedup"] = report.summary->p90;
      s["wins"] = report.summary->wins;
      s["ties"] = report.summary->ties;
      s["losses"] = report.summary->losses;
    }
  }
  out += s.dump() + "\n";
  return out;
}

}  // namespace prooforge
