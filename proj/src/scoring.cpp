#include "lir/scoring.hpp"

#include <algorithm>

namespace lir {

double maxsim(const TokenMatrix& q, const TokenMatrix& dv) {
  if (q.dim() != dv.dim())
    throw IoError("maxsim dimension mismatch: query '" + q.id + "' d=" +
                  std::to_string(q.dim()) + " vs doc '" + dv.id + "' d=" +
                  std::to_string(dv.dim()));
  const RowMatrixXf sims = q.rows * dv.rows.transpose();  // n_q x n_d
  double score = 0.0;
  for (Eigen::Index i = 0; i < sims.rows(); ++i)
    score += static_cast<double>(sims.row(i).maxCoeff());
  return score;
}

double fde_score(const FdeVector& qf, const FdeVector& df) {
  if (qf.role != Role::Query || df.role != Role::Document)
    throw ConfigError("fde_score expects a Query FDE and a Document FDE");
  if (qf.dim() != df.dim())
    throw IoError("fde dimension mismatch: " + std::to_string(qf.dim()) + " vs " +
                  std::to_string(df.dim()));
  double score = 0.0;
  for (Eigen::Index i = 0; i < qf.dim(); ++i)
    score += static_cast<double>(qf.values(i)) * static_cast<double>(df.values(i));
  return score;
}

std::vector<RunEntry> maxsim_batch(const TokenMatrix& q,
                                   const std::vector<TokenMatrix>& docs, int top_k) {
  if (docs.empty()) throw IoError("maxsim_batch: empty corpus");
  if (top_k < 1) throw ConfigError("maxsim_batch: top_k must be >= 1");
  std::vector<RunEntry> entries;
  entries.reserve(docs.size());
  for (const TokenMatrix& dv : docs) entries.push_back({dv.id, maxsim(q, dv)});
  const std::size_t keep = std::min(static_cast<std::size_t>(top_k), entries.size());
  std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(keep),
                    entries.end(), run_entry_less);
  entries.resize(keep);
  return entries;
}

}  // namespace lir
