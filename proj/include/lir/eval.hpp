#pragma once

#include <map>
#include <string>
#include <vector>

#include "lir/types.hpp"

namespace lir {

/// Judged grades for one query: doc id -> grade. Absent docs mean grade 0.
using QueryQrels = std::map<std::string, int>;

/// Fraction of the top k that is relevant; unretrieved slots count as
/// non-relevant, so the denominator is always k.
double precision_at_k(const std::vector<RunEntry>& ranked, const QueryQrels& qrels_q,
                      int k);

/// Relevant docs retrieved in the top k over all relevant docs.
double recall_at_k(const std::vector<RunEntry>& ranked, const QueryQrels& qrels_q, int k);

/// DCG@k / IDCG@k with gain 2^grade - 1 and discount 1/log2(rank + 1).
double ndcg_at_k(const std::vector<RunEntry>& ranked, const QueryQrels& qrels_q, int k);

/// trec_eval AP: sum of precision at each relevant retrieved rank <= cutoff,
/// normalized by the total relevant count.
double average_precision(const std::vector<RunEntry>& ranked, const QueryQrels& qrels_q,
                         int cutoff = 1000);

struct MetricReport {
  std::vector<int> cutoffs;
  // Keys: "map", "ndcg@K", "recall@K", "precision@K".
  std::map<std::string, double> macro;
  std::map<std::string, std::map<std::string, double>> per_query;
  int evaluated_queries = 0;
  int zero_relevant_excluded = 0;  // judged but with no grade > 0
  int missing_from_run = 0;        // in qrels but absent from the run
};

/// Macro-averages over queries with at least one relevant doc. Every run
/// query must be judged; unknown run queries raise EvalMismatchError.
MetricReport evaluate_run(const RunResult& run, const Qrels& qrels,
                          const std::vector<int>& cutoffs);

/// Key-value report: one "metric@cutoff value" line, 6 decimal digits.
void write_metric_report(const MetricReport& report, const std::string& path);

/// Human-readable table for standard output.
std::string format_metric_table(const MetricReport& report);

inline const std::vector<int>& default_cutoffs() {
  static const std::vector<int> cutoffs = {10, 100, 250, 500, 750, 1000};
  return cutoffs;
}

}  // namespace lir
