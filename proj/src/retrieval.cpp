#include "lir/retrieval.hpp"

#include <algorithm>
#include <chrono>
#include <unordered_map>
#include <unordered_set>

#include "lir/fde.hpp"
#include "lir/scoring.hpp"

namespace lir {

namespace {

using Clock = std::chrono::steady_clock;

double ms_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

const std::vector<TokenMatrix>& require_corpus(const RetrievalInput& input,
                                               const char* mode) {
  if (input.corpus) return *input.corpus;
  if (input.plaid) return input.plaid->docs;
  throw ConfigError(std::string(mode) + " retrieval requires the token corpus");
}

const FlatFdeIndex& require_flat(const RetrievalInput& input, const char* mode) {
  if (!input.flat)
    throw ConfigError(std::string(mode) + " retrieval requires a flat FDE index");
  return *input.flat;
}

std::unordered_map<std::string, const TokenMatrix*> index_by_id(
    const std::vector<TokenMatrix>& corpus) {
  std::unordered_map<std::string, const TokenMatrix*> map;
  map.reserve(corpus.size());
  for (const TokenMatrix& m : corpus) map.emplace(m.id, &m);
  return map;
}

void truncate(std::vector<RunEntry>& entries, int top_k) {
  if (static_cast<int>(entries.size()) > top_k)
    entries.resize(static_cast<std::size_t>(top_k));
}

}  // namespace

std::pair<RunResult, std::vector<QueryTiming>> retrieve(
    const std::vector<TokenMatrix>& queries, const RetrievalInput& input,
    const PipelineConfig& config) {
  if (queries.empty()) throw ConfigError("retrieve: no queries");
  if (config.top_k < 1) throw ConfigError("retrieve: top_k must be >= 1");
  if (config.mode == PipelineMode::MuveraRerank && config.rerank_depth < config.top_k)
    throw ConfigError("rerank depth below top-k (K=" +
                      std::to_string(config.rerank_depth) + ", top_k=" +
                      std::to_string(config.top_k) + ")");
  if (config.mode == PipelineMode::PlaidLite &&
      config.effective_candidates() < config.top_k)
    throw ConfigError("candidate depth below top-k");

  // Mode prerequisites, resolved once.
  const std::vector<TokenMatrix>* corpus = nullptr;
  const FlatFdeIndex* flat = nullptr;
  const PlaidLiteIndex* plaid = nullptr;
  switch (config.mode) {
    case PipelineMode::ExactFull:
      corpus = &require_corpus(input, "exact");
      break;
    case PipelineMode::PlaidLite:
      if (!input.plaid) throw ConfigError("plaid retrieval requires a PLAID-lite index");
      plaid = input.plaid;
      break;
    case PipelineMode::Muvera:
      flat = &require_flat(input, "muvera");
      break;
    case PipelineMode::MuveraRerank:
      flat = &require_flat(input, "muvera-rerank");
      corpus = &require_corpus(input, "muvera-rerank");
      break;
  }

  std::unordered_map<std::string, const TokenMatrix*> by_id;
  if (config.mode == PipelineMode::MuveraRerank) by_id = index_by_id(*corpus);

  RunResult run;
  std::vector<QueryTiming> timings;
  timings.reserve(queries.size());

  for (const TokenMatrix& q : queries) {
    QueryTiming timing;
    timing.query_id = q.id;
    const auto t_start = Clock::now();
    std::vector<RunEntry> entries;

    switch (config.mode) {
      case PipelineMode::ExactFull: {
        entries = maxsim_batch(q, *corpus, config.top_k);
        timing.search_ms = ms_between(t_start, Clock::now());
        break;
      }
      case PipelineMode::PlaidLite: {
        std::vector<RunEntry> candidates =
            plaid_candidates(*plaid, q, config.effective_candidates());
        std::unordered_map<std::string, const TokenMatrix*> docs = index_by_id(plaid->docs);
        for (RunEntry& e : candidates) e.score = maxsim(q, *docs.at(e.doc_id));
        sort_run_entries(candidates);
        truncate(candidates, config.top_k);
        entries = std::move(candidates);
        timing.search_ms = ms_between(t_start, Clock::now());
        break;
      }
      case PipelineMode::Muvera: {
        const FdeVector qf = encode_query(q, flat->config);
        const auto t_encoded = Clock::now();
        timing.encode_ms = ms_between(t_start, t_encoded);
        entries = search_flat(*flat, qf, config.top_k);
        timing.search_ms = ms_between(t_encoded, Clock::now());
        break;
      }
      case PipelineMode::MuveraRerank: {
        const FdeVector qf = encode_query(q, flat->config);
        const auto t_encoded = Clock::now();
        timing.encode_ms = ms_between(t_start, t_encoded);
        entries = search_flat(*flat, qf, config.rerank_depth);
        const auto t_searched = Clock::now();
        timing.search_ms = ms_between(t_encoded, t_searched);
        for (RunEntry& e : entries) {
          const auto it = by_id.find(e.doc_id);
          if (it == by_id.end())
            throw IoError("rerank corpus is missing doc '" + e.doc_id + "'");
          e.score = maxsim(q, *it->second);
        }
        sort_run_entries(entries);
        truncate(entries, config.top_k);
        timing.rerank_ms = ms_between(t_searched, Clock::now());
        break;
      }
    }

    timing.total_ms = ms_between(t_start, Clock::now());
    if (!run.emplace(q.id, std::move(entries)).second)
      throw IoError("duplicate query id '" + q.id + "'");
    timings.push_back(std::move(timing));
  }
  return {std::move(run), std::move(timings)};
}

OverlapReport overlap_at_k(const RunResult& a, const RunResult& b, int k) {
  if (k < 1) throw ConfigError("overlap_at_k: k must be >= 1");
  OverlapReport report;
  for (const auto& [qid, entries_a] : a) {
    const auto it = b.find(qid);
    if (it == b.end())
      throw EvalMismatchError("overlap_at_k: query '" + qid + "' missing from second run");
    std::unordered_set<std::string> top_b;
    const auto& entries_b = it->second;
    for (std::size_t i = 0; i < entries_b.size() && i < static_cast<std::size_t>(k); ++i)
      top_b.insert(entries_b[i].doc_id);
    std::size_t shared = 0;
    for (std::size_t i = 0; i < entries_a.size() && i < static_cast<std::size_t>(k); ++i)
      if (top_b.count(entries_a[i].doc_id)) ++shared;
    report.per_query[qid] = static_cast<double>(shared) / static_cast<double>(k);
  }
  for (const auto& [qid, entries_b] : b)
    if (!a.count(qid))
      throw EvalMismatchError("overlap_at_k: query '" + qid + "' missing from first run");
  if (!report.per_query.empty()) {
    double sum = 0.0;
    for (const auto& [qid, v] : report.per_query) sum += v;
    report.mean = sum / static_cast<double>(report.per_query.size());
  }
  return report;
}

}  // namespace lir
