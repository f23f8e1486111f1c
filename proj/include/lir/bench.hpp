#pragma once

#include <string>
#include <vector>

#include "lir/eval.hpp"
#include "lir/retrieval.hpp"
#include "lir/types.hpp"

namespace lir {

struct BenchRow {
  std::string mode;         // exact | plaid | muvera | muvera-rerank
  std::int64_t fde_dim = 0;  // 0 for modes without an FDE index
  double index_ms = 0.0;
  double lat_mean_ms = 0.0;
  double lat_p50_ms = 0.0;
  double lat_p95_ms = 0.0;
  MetricReport quality;  // computed from the same timed run
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::string environment;
  int warmup = 0;
  int measured_queries = 0;
};

/// "mode[:k_sim]" entries separated by ';', e.g.
/// "muvera:0;muvera:2;muvera-rerank:3;exact". Each entry copies `defaults`
/// and overrides mode and k_sim.
std::vector<PipelineConfig> parse_sweep(const std::string& spec,
                                        const PipelineConfig& defaults);

std::string mode_name(PipelineMode mode);

/// For each config: build the needed index (timed), run `warmup` untimed
/// queries, then time every query sequentially and evaluate the resulting
/// run. Rankings are deterministic under the seed; only timings vary.
BenchReport run_bench(const std::vector<TokenMatrix>& corpus,
                      const std::vector<TokenMatrix>& queries, const Qrels& qrels,
                      const std::vector<PipelineConfig>& sweep, int warmup,
                      std::uint64_t seed);

/// CSV columns: mode, fde_dim, index_ms, lat_mean_ms, lat_p50_ms, lat_p95_ms,
/// ndcg@100, map, recall@100.
void emit_tradeoff_csv(const BenchReport& report, const std::string& path);

std::string format_bench_table(const BenchReport& report);

}  // namespace lir
