#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace lir {

/// Row-major dense float matrix; rows are token embeddings.
using RowMatrixXf = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// I/O and data-format failures (bad files, dimension mismatches). CLI exit code 1.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid configuration (bad flags, incompatible mode/index). CLI exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Run/qrels query-id mismatch during evaluation. CLI exit code 3.
struct EvalMismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Variable-length set of d-dimensional token embeddings for one query or
/// document. Rows are unit-L2-normalized at ingestion; scoring assumes it.
struct TokenMatrix {
  std::string id;
  RowMatrixXf rows;  // n x d

  Eigen::Index tokens() const { return rows.rows(); }
  Eigen::Index dim() const { return rows.cols(); }
};

/// Inner projection applied to each token before partition aggregation.
enum class Projection : std::uint8_t { Identity = 0, SparseSketch = 1 };

/// Hyperparameters of the fixed-dimensional encoding. Role-agnostic: the same
/// config must be used for queries and documents or their scores are
/// meaningless.
struct EncodingConfig {
  int d = 128;                                    // token dimension
  int k_sim = 3;                                  // SimHash bits; 2^k_sim partitions
  int repetitions = 1;                            // independent repetitions, concatenated
  Projection projection = Projection::Identity;   // per-token inner projection
  int sketch_dim = 0;                             // SparseSketch width; 0 means d/4
  std::uint64_t seed = 0;

  int num_partitions() const { return 1 << k_sim; }

  /// Width of one partition block: d for Identity, sketch width otherwise.
  int proj_dim() const {
    if (projection == Projection::Identity) return d;
    if (sketch_dim > 0) return sketch_dim;
    return d / 4 > 0 ? d / 4 : 1;
  }

  void validate() const;
};

/// Output dimension D = repetitions * proj_dim * 2^k_sim.
std::int64_t fde_dim(const EncodingConfig& config);

enum class Role : std::uint8_t { Query = 0, Document = 1 };

/// Fixed-dimensional encoding of one query or document.
struct FdeVector {
  std::string id;
  Role role = Role::Document;
  Eigen::VectorXf values;

  Eigen::Index dim() const { return values.size(); }
};

/// query id -> (doc id -> relevance grade >= 0). Absent pairs mean grade 0.
using Qrels = std::map<std::string, std::map<std::string, int>>;

struct RunEntry {
  std::string doc_id;
  double score = 0.0;
};

/// query id -> ranked docs, descending by (score, then doc id ascending).
using RunResult = std::map<std::string, std::vector<RunEntry>>;

/// (score desc, doc id asc): the total order used for every ranked list.
inline bool run_entry_less(const RunEntry& a, const RunEntry& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.doc_id < b.doc_id;
}

void sort_run_entries(std::vector<RunEntry>& entries);

/// Checks all TokenMatrix invariants (n,d >= 1, finite, unit rows) and returns
/// the input unchanged. Throws IoError naming the offending id.
const TokenMatrix& validate_token_matrix(const TokenMatrix& m);

/// Row norm tolerance for the unit-normalization invariant.
inline constexpr float kRowNormTolerance = 1e-4f;

/// Normalizes every row to unit L2. Rows already within kRowNormTolerance of
/// unit norm are left bit-identical, so normalization is idempotent.
void l2_normalize_rows(RowMatrixXf& rows, const std::string& id);

}  // namespace lir
