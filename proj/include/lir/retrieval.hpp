#pragma once

#include <map>
#include <utility>
#include <vector>

#include "lir/index.hpp"
#include "lir/types.hpp"

namespace lir {

enum class PipelineMode { ExactFull, PlaidLite, Muvera, MuveraRerank };

struct PipelineConfig {
  PipelineMode mode = PipelineMode::ExactFull;
  int top_k = 1000;
  int rerank_depth = 100;   // MuveraRerank: exact-rescore depth K, must be >= top_k
  int n_candidates = 0;     // PlaidLite: 0 means max(top_k, 1000)
  EncodingConfig encoding;  // Muvera modes

  int effective_candidates() const {
    return n_candidates > 0 ? n_candidates : std::max(top_k, 1000);
  }
};

/// Per-query wall times in fractional milliseconds (monotonic clock).
/// rerank_ms is 0 for non-rerank modes; total covers the whole query.
struct QueryTiming {
  std::string query_id;
  double encode_ms = 0.0;
  double search_ms = 0.0;
  double rerank_ms = 0.0;
  double total_ms = 0.0;
};

/// The data a pipeline draws on; which members must be set depends on the
/// mode (ExactFull: corpus; PlaidLite: plaid; Muvera: flat; MuveraRerank:
/// flat + corpus). ExactFull falls back to the plaid index's stored token
/// matrices when no raw corpus is supplied.
struct RetrievalInput {
  const std::vector<TokenMatrix>* corpus = nullptr;
  const FlatFdeIndex* flat = nullptr;
  const PlaidLiteIndex* plaid = nullptr;
};

std::pair<RunResult, std::vector<QueryTiming>> retrieve(
    const std::vector<TokenMatrix>& queries, const RetrievalInput& input,
    const PipelineConfig& config);

struct OverlapReport {
  std::map<std::string, double> per_query;  // |top-k(a) ∩ top-k(b)| / k
  double mean = 0.0;
};

/// Fraction of shared documents in the two runs' top-k lists, per query and
/// averaged. Both runs must cover the same query ids.
OverlapReport overlap_at_k(const RunResult& a, const RunResult& b, int k);

}  // namespace lir
