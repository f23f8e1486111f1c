#include "lir/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace lir {

namespace {

bool is_relevant(const QueryQrels& qrels_q, const std::string& doc_id) {
  const auto it = qrels_q.find(doc_id);
  return it != qrels_q.end() && it->second > 0;
}

int relevant_count(const QueryQrels& qrels_q) {
  int count = 0;
  for (const auto& [doc_id, grade] : qrels_q)
    if (grade > 0) ++count;
  return count;
}

double log2_discount(int rank) { return std::log2(static_cast<double>(rank) + 1.0); }

}  // namespace

double precision_at_k(const std::vector<RunEntry>& ranked, const QueryQrels& qrels_q,
                      int k) {
  if (k < 1) throw ConfigError("precision_at_k: k must be >= 1");
  int hits = 0;
  for (std::size_t i = 0; i < ranked.size() && i < static_cast<std::size_t>(k); ++i)
    if (is_relevant(qrels_q, ranked[i].doc_id)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(k);
}

double recall_at_k(const std::vector<RunEntry>& ranked, const QueryQrels& qrels_q, int k) {
  if (k < 1) throw ConfigError("recall_at_k: k must be >= 1");
  const int total = relevant_count(qrels_q);
  if (total == 0) return 0.0;
  int hits = 0;
  for (std::size_t i = 0; i < ranked.size() && i < static_cast<std::size_t>(k); ++i)
    if (is_relevant(qrels_q, ranked[i].doc_id)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(total);
}

double ndcg_at_k(const std::vector<RunEntry>& ranked, const QueryQrels& qrels_q, int k) {
  if (k < 1) throw ConfigError("ndcg_at_k: k must be >= 1");
  double dcg = 0.0;
  for (std::size_t i = 0; i < ranked.size() && i < static_cast<std::size_t>(k); ++i) {
    const auto it = qrels_q.find(ranked[i].doc_id);
    if (it == qrels_q.end() || it->second <= 0) continue;
    dcg += (std::exp2(static_cast<double>(it->second)) - 1.0) /
           log2_discount(static_cast<int>(i) + 1);
  }
  std::vector<int> grades;
  grades.reserve(qrels_q.size());
  for (const auto& [doc_id, grade] : qrels_q)
    if (grade > 0) grades.push_back(grade);
  if (grades.empty()) return 0.0;
  std::sort(grades.begin(), grades.end(), std::greater<int>());
  double idcg = 0.0;
  for (std::size_t i = 0; i < grades.size() && i < static_cast<std::size_t>(k); ++i)
    idcg += (std::exp2(static_cast<double>(grades[i])) - 1.0) /
            log2_discount(static_cast<int>(i) + 1);
  return dcg / idcg;
}

double average_precision(const std::vector<RunEntry>& ranked, const QueryQrels& qrels_q,
                         int cutoff) {
  if (cutoff < 1) throw ConfigError("average_precision: cutoff must be >= 1");
  const int total = relevant_count(qrels_q);
  if (total == 0) return 0.0;
  double sum = 0.0;
  int hits = 0;
  for (std::size_t i = 0; i < ranked.size() && i < static_cast<std::size_t>(cutoff); ++i) {
    if (is_relevant(qrels_q, ranked[i].doc_id)) {
      ++hits;
      sum += static_cast<double>(hits) / (static_cast<double>(i) + 1.0);
    }
  }
  return sum / static_cast<double>(total);
}

MetricReport evaluate_run(const RunResult& run, const Qrels& qrels,
                          const std::vector<int>& cutoffs) {
  if (run.empty()) throw EvalMismatchError("evaluate_run: empty run");
  if (cutoffs.empty()) throw ConfigError("evaluate_run: no cutoffs");
  for (const int k : cutoffs)
    if (k < 1) throw ConfigError("evaluate_run: cutoffs must be >= 1");

  std::vector<std::string> unknown;
  for (const auto& [qid, entries] : run)
    if (!qrels.count(qid)) unknown.push_back(qid);
  if (!unknown.empty()) {
    std::string msg = "run queries missing from qrels:";
    for (const std::string& qid : unknown) msg += " " + qid;
    throw EvalMismatchError(msg);
  }

  MetricReport report;
  report.cutoffs = cutoffs;
  for (const auto& [qid, by_doc] : qrels)
    if (!run.count(qid)) ++report.missing_from_run;

  std::map<std::string, double> sums;
  for (const auto& [qid, entries] : run) {
    const QueryQrels& qrels_q = qrels.at(qid);
    if (relevant_count(qrels_q) == 0) {
      ++report.zero_relevant_excluded;
      continue;
    }
    auto& row = report.per_query[qid];
    row["map"] = average_precision(entries, qrels_q);
    for (const int k : cutoffs) {
      const std::string suffix = "@" + std::to_string(k);
      row["ndcg" + suffix] = ndcg_at_k(entries, qrels_q, k);
      row["recall" + suffix] = recall_at_k(entries, qrels_q, k);
      row["precision" + suffix] = precision_at_k(entries, qrels_q, k);
    }
    for (const auto& [key, value] : row) sums[key] += value;
    ++report.evaluated_queries;
  }

  if (report.evaluated_queries == 0)
    throw EvalMismatchError("evaluate_run: no query has a relevant judgment");
  for (const auto& [key, total] : sums)
    report.macro[key] = total / static_cast<double>(report.evaluated_queries);
  return report;
}

void write_metric_report(const MetricReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write report: " + path);
  char buf[64];
  for (const auto& [key, value] : report.macro) {
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    out << key << ' ' << buf << '\n';
  }
  if (!out) throw IoError("write failure: " + path);
}

std::string format_metric_table(const MetricReport& report) {
  std::ostringstream out;
  char buf[64];
  out << "queries evaluated: " << report.evaluated_queries
      << " (zero-relevant excluded: " << report.zero_relevant_excluded
      << ", judged but missing from run: " << report.missing_from_run << ")\n";
  out << "metric     ";
  for (const int k : report.cutoffs) {
    std::snprintf(buf, sizeof(buf), "%9s", ("@" + std::to_string(k)).c_str());
    out << buf;
  }
  out << '\n';
  for (const char* family : {"ndcg", "recall", "precision"}) {
    std::snprintf(buf, sizeof(buf), "%-11s", family);
    out << buf;
    for (const int k : report.cutoffs) {
      std::snprintf(buf, sizeof(buf), " %8.6f",
                    report.macro.at(std::string(family) + "@" + std::to_string(k)));
      out << buf;
    }
    out << '\n';
  }
  std::snprintf(buf, sizeof(buf), "map         %8.6f\n", report.macro.at("map"));
  out << buf;
  return out.str();
}

}  // namespace lir
