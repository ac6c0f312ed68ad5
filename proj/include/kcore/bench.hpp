#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kcore/graph.hpp"
#include "kcore/maint_par.hpp"
#include "kcore/maint_state.hpp"

namespace kcore {

struct Verdict {
  std::string name;
  bool ok = true;
  /// First offending vertex or list, empty on success.
  std::string detail;
};

struct Verification {
  std::vector<Verdict> verdicts;

  bool ok() const noexcept;
  /// One "name: pass|FAIL detail" line per verdict.
  std::string summary() const;
};

/// Checks a quiescent state: (a) cores against a fresh decomposition,
/// (b) order validity, (c) known mcd values, (d) epochs even, removal status
/// idle, no candidate in-degree left and no lock held, (e) order-list audits
/// and list membership matching the core number.
Verification verify(const MaintState& st);

enum class BenchMode { kInsert, kRemove, kBoth };

struct BenchConfig {
  /// Edge-list path, or "er:N:M" / "ba:N:K" for a generated graph.
  std::string graph;
  EdgeFormat format = EdgeFormat::kStatic;
  std::size_t batch = 0;
  BenchMode mode = BenchMode::kBoth;
  std::vector<std::size_t> workers{1};
  std::uint64_t seed = 1;
  std::size_t repeat = 1;
  bool verify = false;
  bool histogram = false;
  bool steal = false;
};

struct BenchRow {
  std::string graph;
  std::string mode;
  std::size_t workers = 1;
  std::size_t rep = 0;
  std::size_t edges = 0;
  double millis = 0;
  std::optional<double> speedup;
  std::optional<bool> verified;
  std::optional<double> small_fraction;
};

struct BenchSummary {
  std::string mode;
  std::size_t workers = 1;
  double mean_millis = 0;
  /// Half-width of the 95% Student-t interval; absent for a single repetition.
  std::optional<double> ci95;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::vector<BenchSummary> summaries;
  /// Per-edge |V+| of insertions and |V*| of removals, over all runs.
  SizeHistogram insert_histogram;
  SizeHistogram remove_histogram;
  /// Failed verdict lines; empty when everything passed or nothing was checked.
  std::vector<std::string> failures;
  LoadedGraph loaded;

  bool verified_ok() const noexcept { return failures.empty(); }
};

/// Graph source for run_bench; exposed so callers can share one load.
LoadedGraph load_bench_graph(const BenchConfig& cfg);

BenchReport run_bench(const BenchConfig& cfg);
BenchReport run_bench(const BenchConfig& cfg, LoadedGraph loaded);

void write_csv_header(std::ostream& out);
void write_csv_rows(std::ostream& out, const BenchReport& report);
/// Rows "kind,bucket,count" for buckets 0..10 and >10, then "kind,le10_frac,x".
void emit_histogram(std::ostream& out, const std::string& kind, const SizeHistogram& hist);

/// Half-width of the two-sided 95% Student-t interval of the sample mean.
std::optional<double> ci95_half_width(const std::vector<double>& samples);

}  // namespace kcore
