#include "lir/types.hpp"

#include <algorithm>
#include <cmath>

namespace lir {

void EncodingConfig::validate() const {
  if (d < 1) throw ConfigError("encoding d must be >= 1");
  if (k_sim < 0 || k_sim > 16) throw ConfigError("k_sim must be in [0, 16]");
  if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (projection == Projection::SparseSketch && proj_dim() > d)
    throw ConfigError("sketch dimension exceeds token dimension d");
}

std::int64_t fde_dim(const EncodingConfig& config) {
  config.validate();
  return static_cast<std::int64_t>(config.repetitions) * config.proj_dim() *
         (std::int64_t{1} << config.k_sim);
}

void sort_run_entries(std::vector<RunEntry>& entries) {
  std::sort(entries.begin(), entries.end(), run_entry_less);
}

const TokenMatrix& validate_token_matrix(const TokenMatrix& m) {
  if (m.rows.rows() < 1)
    throw IoError("empty token matrix: '" + m.id + "'");
  if (m.rows.cols() < 1)
    throw IoError("token matrix '" + m.id + "' has dimension 0");
  if (!m.rows.allFinite())
    throw IoError("non-finite value in token matrix '" + m.id + "'");
  for (Eigen::Index i = 0; i < m.rows.rows(); ++i) {
    const float norm = m.rows.row(i).norm();
    if (std::abs(norm - 1.0f) > kRowNormTolerance)
      throw IoError("token matrix '" + m.id + "' row " + std::to_string(i) +
                    " is not unit-normalized (norm " + std::to_string(norm) + ")");
  }
  return m;
}

void l2_normalize_rows(RowMatrixXf& rows, const std::string& id) {
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    if (!rows.row(i).allFinite())
      throw IoError("non-finite value in token matrix '" + id + "'");
    const float norm = rows.row(i).norm();
    if (norm == 0.0f)
      throw IoError("zero-norm token row " + std::to_string(i) + " in '" + id + "'");
    if (std::abs(norm - 1.0f) > kRowNormTolerance) rows.row(i) /= norm;
  }
}

}  // namespace lir
