#include "kcore/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "kcore/core_decomp.hpp"

namespace kcore {

bool Verification::ok() const noexcept {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.ok; });
}

std::string Verification::summary() const {
  std::ostringstream out;
  for (const auto& v : verdicts) {
    out << v.name << ": " << (v.ok ? "pass" : "FAIL");
    if (!v.ok) out << " " << v.detail;
    out << "\n";
  }
  return out.str();
}

namespace {

std::string vertex_note(Vertex v, const std::string& what) {
  return "vertex " + std::to_string(v) + " " + what;
}

}  // namespace

Verification verify(const MaintState& st) {
  const auto n = static_cast<Vertex>(st.num_vertices());
  const Graph& g = st.graph();
  Verification result;

  Verdict cores{"core numbers", true, {}};
  const auto oracle = bz_decompose(g).core;
  for (Vertex v = 0; v < n && cores.ok; ++v) {
    if (st.core(v) != oracle[v]) {
      cores.ok = false;
      cores.detail = vertex_note(v, "has core " + std::to_string(st.core(v)) + ", expected " +
                                        std::to_string(oracle[v]));
    }
  }
  result.verdicts.push_back(std::move(cores));

  Verdict order{"order validity", true, {}};
  for (Vertex v = 0; v < n && order.ok; ++v) {
    const auto successors = st.count_successors(v);
    const auto stored = st.record(v).deg_out.load(std::memory_order_relaxed);
    if (successors != stored) {
      order.ok = false;
      order.detail = vertex_note(v, "has " + std::to_string(successors) +
                                        " successors but remaining out-degree " +
                                        std::to_string(stored));
    } else if (successors > static_cast<std::int32_t>(st.core(v))) {
      order.ok = false;
      order.detail = vertex_note(v, "has " + std::to_string(successors) +
                                        " successors above its core " +
                                        std::to_string(st.core(v)));
    }
  }
  result.verdicts.push_back(std::move(order));

  Verdict mcd{"max-core degree", true, {}};
  for (Vertex v = 0; v < n && mcd.ok; ++v) {
    const auto stored = st.record(v).mcd.load(std::memory_order_relaxed);
    if (stored == kUnknownMcd) continue;
    const auto k = st.core(v);
    std::int32_t count = 0;
    for (Vertex w : g.neighbors(v)) count += st.core(w) >= k ? 1 : 0;
    if (stored != count || stored < static_cast<std::int32_t>(k)) {
      mcd.ok = false;
      mcd.detail = vertex_note(v, "stores mcd " + std::to_string(stored) + ", counted " +
                                      std::to_string(count) + " at core " + std::to_string(k));
    }
  }
  result.verdicts.push_back(std::move(mcd));

  Verdict rest{"quiescence", true, {}};
  for (Vertex v = 0; v < n && rest.ok; ++v) {
    const auto& rec = st.record(v);
    if (rec.epoch.load() % 2 != 0) {
      rest = {rest.name, false, vertex_note(v, "has an odd epoch")};
    } else if (st.status(v) != Propagation::kIdle) {
      rest = {rest.name, false, vertex_note(v, "has a pending removal status")};
    } else if (rec.deg_in != 0) {
      rest = {rest.name, false, vertex_note(v, "has candidate in-degree left over")};
    } else if (rec.owner.load() != kUnlocked) {
      rest = {rest.name, false, vertex_note(v, "is still locked")};
    }
  }
  result.verdicts.push_back(std::move(rest));

  Verdict lists{"order lists", true, {}};
  std::size_t listed = 0;
  for (std::uint32_t k = 0; k < st.list_slots() && lists.ok; ++k) {
    const auto* list = st.find_list(k);
    if (list == nullptr) continue;
    const auto audit = list->audit();
    if (!audit.ok) lists = {lists.name, false, audit.error};
    listed += audit.entries;
  }
  for (Vertex v = 0; v < n && lists.ok; ++v) {
    const auto* group = st.record(v).entry.group.load();
    const auto* expected = st.find_list(st.core(v));
    if (group == nullptr || expected == nullptr || group->owner != expected) {
      lists = {lists.name, false, vertex_note(v, "is not in the list of its core")};
    }
  }
  if (lists.ok && listed != n) {
    lists = {lists.name, false, std::to_string(listed) + " listed entries for " +
                                    std::to_string(n) + " vertices"};
  }
  result.verdicts.push_back(std::move(lists));
  return result;
}

// ---------------------------------------------------------------------------

std::optional<double> ci95_half_width(const std::vector<double>& samples) {
  if (samples.size() < 2) return std::nullopt;
  const double count = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / count;
  double ss = 0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (count - 1));
  const boost::math::students_t dist(count - 1);
  return boost::math::quantile(boost::math::complement(dist, 0.025)) * sd / std::sqrt(count);
}

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, sep)) parts.push_back(part);
  return parts;
}

LoadedGraph wrap_generated(Graph g) {
  LoadedGraph loaded;
  loaded.external_ids.resize(g.num_vertices());
  std::iota(loaded.external_ids.begin(), loaded.external_ids.end(), std::uint64_t{0});
  const auto edges = g.edges();
  loaded.timeline.reserve(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) loaded.timeline.push_back({edges[i], i});
  loaded.graph = std::move(g);
  return loaded;
}

}  // namespace

LoadedGraph load_bench_graph(const BenchConfig& cfg) {
  const auto parts = split(cfg.graph, ':');
  if (parts.size() == 3 && (parts[0] == "er" || parts[0] == "ba")) {
    const auto n = std::stoull(parts[1]);
    const auto x = std::stoull(parts[2]);
    return wrap_generated(parts[0] == "er" ? make_erdos_renyi(n, x, cfg.seed)
                                           : make_barabasi_albert(n, x, cfg.seed));
  }
  return load_edge_list_file(cfg.graph, cfg.format);
}

BenchReport run_bench(const BenchConfig& cfg) { return run_bench(cfg, load_bench_graph(cfg)); }

BenchReport run_bench(const BenchConfig& cfg, LoadedGraph loaded) {
  if (cfg.repeat < 1) throw std::invalid_argument("repeat must be at least 1");
  if (cfg.workers.empty()) throw std::invalid_argument("no worker counts given");
  for (auto w : cfg.workers) {
    if (w < 1) throw std::invalid_argument("worker counts must be at least 1");
  }

  BenchReport report;
  const Graph& source = loaded.graph;
  const auto sample_mode =
      cfg.format == EdgeFormat::kTemporal ? SampleMode::kTemporalSuffix : SampleMode::kUniform;
  const auto batch = sample_batch(source, cfg.batch, sample_mode, cfg.seed, loaded.timeline);

  // insert-only runs start from the graph without the batch
  Graph base = source;
  if (cfg.mode == BenchMode::kInsert) {
    for (const auto& e : batch.edges) base.remove_edge(e.u, e.v);
  }
  const auto initial_cores = bz_decompose(base).core;

  std::vector<BatchKind> phases;
  if (cfg.mode != BenchMode::kInsert) phases.push_back(BatchKind::kRemove);
  if (cfg.mode != BenchMode::kRemove) phases.push_back(BatchKind::kInsert);

  for (std::size_t workers : cfg.workers) {
    const BatchOptions options{workers, cfg.steal};
    for (std::size_t rep = 0; rep < cfg.repeat; ++rep) {
      MaintState st = init_state(Graph(base));
      for (BatchKind phase : phases) {
        const bool inserting = phase == BatchKind::kInsert;
        const auto start = std::chrono::steady_clock::now();
        const auto result = inserting ? parallel_insert_batch(st, batch.edges, options)
                                      : parallel_remove_batch(st, batch.edges, options);
        const auto stop = std::chrono::steady_clock::now();

        BenchRow row;
        row.graph = cfg.graph;
        row.mode = inserting ? "insert" : "remove";
        row.workers = workers;
        row.rep = rep;
        row.edges = batch.edges.size();
        row.millis = std::chrono::duration<double, std::milli>(stop - start).count();
        if (cfg.histogram) {
          (inserting ? report.insert_histogram : report.remove_histogram).merge(result.histogram);
          row.small_fraction = result.histogram.fraction_small();
        }
        if (cfg.verify) {
          const auto v = verify(st);
          row.verified = v.ok();
          for (const auto& verdict : v.verdicts) {
            if (verdict.ok) continue;
            report.failures.push_back(row.mode + " P=" + std::to_string(workers) + " rep " +
                                      std::to_string(rep) + ": " + verdict.name + ": " +
                                      verdict.detail);
          }
        }
        report.rows.push_back(std::move(row));
      }
      if (cfg.verify && cfg.mode == BenchMode::kBoth && st.cores() != initial_cores) {
        report.failures.push_back("round trip P=" + std::to_string(workers) + " rep " +
                                  std::to_string(rep) + ": cores differ from the initial graph");
        report.rows.back().verified = false;
      }
    }
  }

  std::map<std::pair<std::string, std::size_t>, std::vector<double>> samples;
  for (const auto& row : report.rows) samples[{row.mode, row.workers}].push_back(row.millis);
  std::map<std::string, double> single;
  for (const auto& [key, values] : samples) {
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                        static_cast<double>(values.size());
    report.summaries.push_back({key.first, key.second, mean, ci95_half_width(values)});
    if (key.second == 1) single[key.first] = mean;
  }
  for (auto& row : report.rows) {
    const auto it = single.find(row.mode);
    if (it != single.end() && row.millis > 0) row.speedup = it->second / row.millis;
  }
  report.loaded = std::move(loaded);
  return report;
}

void write_csv_header(std::ostream& out) {
  out << "graph,mode,workers,rep,edges,millis,speedup,verified,vplus_le10_frac\n";
}

void write_csv_rows(std::ostream& out, const BenchReport& report) {
  for (const auto& row : report.rows) {
    out << row.graph << ',' << row.mode << ',' << row.workers << ',' << row.rep << ','
        << row.edges << ',' << row.millis << ',';
    if (row.speedup) out << *row.speedup;
    out << ',';
    if (row.verified) out << (*row.verified ? "pass" : "fail");
    out << ',';
    if (row.small_fraction) out << *row.small_fraction;
    out << '\n';
  }
}

void emit_histogram(std::ostream& out, const std::string& kind, const SizeHistogram& hist) {
  for (std::size_t i = 0; i <= 10; ++i) out << kind << ',' << i << ',' << hist.buckets[i] << '\n';
  out << kind << ",>10," << hist.buckets[11] << '\n';
  out << kind << ",le10_frac," << hist.fraction_small() << '\n';
}

}  // namespace kcore
