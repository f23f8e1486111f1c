#include "lir/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lir/index.hpp"

namespace lir {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  const double ms =
      std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  return std::max(ms, 1e-6);  // clock ticks can coalesce; times stay positive
}

// Nearest-rank percentile over the sorted sample.
double percentile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  const auto rank = static_cast<std::size_t>(
      std::ceil(q * static_cast<double>(n)));
  return values[std::min(n - 1, std::max<std::size_t>(rank, 1) - 1)];
}

std::string build_environment_note() {
  std::ostringstream out;
  out << "compiler " << __VERSION__ << "; Eigen " << EIGEN_WORLD_VERSION << '.'
      << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION
      << "; single-threaded query loop";
  return out.str();
}

int parse_k_sim(const std::string& entry, const std::string& value) {
  try {
    std::size_t pos = 0;
    const int k = std::stoi(value, &pos);
    if (pos != value.size() || k < 0 || k > 16) throw std::invalid_argument("range");
    return k;
  } catch (const std::exception&) {
    throw ConfigError("bad sweep entry '" + entry + "': k_sim must be an integer in [0, 16]");
  }
}

}  // namespace

std::string mode_name(PipelineMode mode) {
  switch (mode) {
    case PipelineMode::ExactFull: return "exact";
    case PipelineMode::PlaidLite: return "plaid";
    case PipelineMode::Muvera: return "muvera";
    case PipelineMode::MuveraRerank: return "muvera-rerank";
  }
  return "?";
}

std::vector<PipelineConfig> parse_sweep(const std::string& spec,
                                        const PipelineConfig& defaults) {
  std::vector<PipelineConfig> sweep;
  std::stringstream stream(spec);
  std::string entry;
  while (std::getline(stream, entry, ';')) {
    if (entry.empty()) continue;
    const auto colon = entry.find(':');
    const std::string mode = entry.substr(0, colon);
    PipelineConfig config = defaults;
    if (mode == "exact") {
      config.mode = PipelineMode::ExactFull;
      if (colon != std::string::npos)
        throw ConfigError("bad sweep entry '" + entry + "': exact takes no k_sim");
    } else if (mode == "plaid") {
      config.mode = PipelineMode::PlaidLite;
      if (colon != std::string::npos)
        throw ConfigError("bad sweep entry '" + entry + "': plaid takes no k_sim");
    } else if (mode == "muvera" || mode == "muvera-rerank") {
      config.mode =
          mode == "muvera" ? PipelineMode::Muvera : PipelineMode::MuveraRerank;
      if (colon != std::string::npos)
        config.encoding.k_sim = parse_k_sim(entry, entry.substr(colon + 1));
    } else {
      throw ConfigError("unknown sweep mode '" + mode + "'");
    }
    sweep.push_back(config);
  }
  if (sweep.empty()) throw ConfigError("empty sweep spec");
  return sweep;
}

BenchReport run_bench(const std::vector<TokenMatrix>& corpus,
                      const std::vector<TokenMatrix>& queries, const Qrels& qrels,
                      const std::vector<PipelineConfig>& sweep, int warmup,
                      std::uint64_t seed) {
  if (sweep.empty()) throw ConfigError("run_bench: empty sweep");
  if (queries.empty()) throw ConfigError("run_bench: no queries");
  if (warmup < 0) throw ConfigError("run_bench: warmup must be >= 0");

  BenchReport report;
  report.environment = build_environment_note();
  report.warmup = warmup;
  report.measured_queries = static_cast<int>(queries.size());

  const std::vector<int> cutoffs = {10, 100};
  for (PipelineConfig config : sweep) {
    config.encoding.seed = seed;

    BenchRow row;
    row.mode = mode_name(config.mode);

    FlatFdeIndex flat;
    PlaidLiteIndex plaid;
    RetrievalInput input;
    input.corpus = &corpus;
    const auto t_build = Clock::now();
    switch (config.mode) {
      case PipelineMode::ExactFull:
        break;
      case PipelineMode::PlaidLite:
        plaid = build_plaid_lite(corpus, 0, seed);
        input.plaid = &plaid;
        break;
      case PipelineMode::Muvera:
      case PipelineMode::MuveraRerank:
        flat = build_flat_index(corpus, config.encoding);
        input.flat = &flat;
        row.fde_dim = fde_dim(config.encoding);
        break;
    }
    row.index_ms = elapsed_ms(t_build);

    if (warmup > 0) {
      std::vector<TokenMatrix> warm;
      warm.reserve(static_cast<std::size_t>(warmup));
      for (int i = 0; i < warmup; ++i) {
        warm.push_back(queries[static_cast<std::size_t>(i) % queries.size()]);
        warm.back().id += "#warm" + std::to_string(i);  // ids must stay unique
      }
      retrieve(warm, input, config);
    }

    auto [run, timings] = retrieve(queries, input, config);

    std::vector<double> latencies;
    latencies.reserve(timings.size());
    double sum = 0.0;
    for (const QueryTiming& t : timings) {
      latencies.push_back(t.total_ms);
      sum += t.total_ms;
    }
    row.lat_mean_ms = sum / static_cast<double>(latencies.size());
    row.lat_p50_ms = percentile(latencies, 0.50);
    row.lat_p95_ms = percentile(latencies, 0.95);
    row.quality = evaluate_run(run, qrels, cutoffs);
    report.rows.push_back(std::move(row));
  }
  return report;
}

void emit_tradeoff_csv(const BenchReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write csv: " + path);
  out << "mode,fde_dim,index_ms,lat_mean_ms,lat_p50_ms,lat_p95_ms,ndcg@100,map,"
         "recall@100\n";
  char buf[256];
  for (const BenchRow& row : report.rows) {
    std::snprintf(buf, sizeof(buf), "%s,%lld,%.3f,%.4f,%.4f,%.4f,%.6f,%.6f,%.6f\n",
                  row.mode.c_str(), static_cast<long long>(row.fde_dim), row.index_ms,
                  row.lat_mean_ms, row.lat_p50_ms, row.lat_p95_ms,
                  row.quality.macro.at("ndcg@100"), row.quality.macro.at("map"),
                  row.quality.macro.at("recall@100"));
    out << buf;
  }
  if (!out) throw IoError("write failure: " + path);
}

std::string format_bench_table(const BenchReport& report) {
  std::ostringstream out;
  out << "environment: " << report.environment << "\nwarmup: " << report.warmup
      << ", measured queries: " << report.measured_queries << '\n';
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-14s %8s %12s %12s %12s %12s %9s %9s %10s\n", "mode",
                "fde_dim", "index_ms", "lat_mean_ms", "lat_p50_ms", "lat_p95_ms",
                "ndcg@100", "map", "recall@100");
  out << buf;
  for (const BenchRow& row : report.rows) {
    std::snprintf(buf, sizeof(buf),
                  "%-14s %8lld %12.3f %12.4f %12.4f %12.4f %9.6f %9.6f %10.6f\n",
                  row.mode.c_str(), static_cast<long long>(row.fde_dim), row.index_ms,
                  row.lat_mean_ms, row.lat_p50_ms, row.lat_p95_ms,
                  row.quality.macro.at("ndcg@100"), row.quality.macro.at("map"),
                  row.quality.macro.at("recall@100"));
    out << buf;
  }
  return out.str();
}

}  // namespace lir
