#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lir/types.hpp"

namespace lir {

// Index container, little-endian:
//   magic "TCIX" | u16 version=1 | u8 kind (1=flat, 2=plaid)
// followed by the kind-specific config block and arrays. Build wall-time is
// not persisted: index bytes must be a pure function of (corpus, config).
inline constexpr char kIndexMagic[4] = {'T', 'C', 'I', 'X'};
inline constexpr std::uint16_t kIndexVersion = 1;

enum class IndexKind : std::uint8_t { Flat = 1, PlaidLite = 2 };

/// Flat FDE index: one document encoding per row, searched by exhaustive
/// inner-product scan.
struct FlatFdeIndex {
  EncodingConfig config;
  std::vector<std::string> doc_ids;
  RowMatrixXf fdes;  // num_docs x D
  std::uint64_t corpus_hash = 0;
  double build_ms = 0.0;  // in-memory only

  Eigen::Index num_docs() const { return fdes.rows(); }
};

/// PLAID-lite index: token-level centroids for pruning plus the full token
/// matrices for exact rescoring. No residual compression.
struct PlaidLiteIndex {
  int d = 0;
  std::uint64_t seed = 0;
  RowMatrixXf centroids;  // C x d, unit rows
  std::vector<TokenMatrix> docs;
  std::vector<std::vector<int>> assignments;      // per doc, per token centroid id
  std::vector<std::vector<int>> doc_centroids;    // per doc, sorted distinct ids
  std::uint64_t corpus_hash = 0;
  double build_ms = 0.0;  // in-memory only

  int num_centroids() const { return static_cast<int>(centroids.rows()); }
  std::int64_t total_tokens() const;
};

struct KmeansResult {
  RowMatrixXf centroids;         // C x d, unit rows
  std::vector<int> assignments;  // nearest stored centroid per point
  int iterations_run = 0;
};

/// Lloyd's algorithm with k-means++ seeding from the deterministic generator.
/// Empty clusters are re-seeded from the farthest point; centroids are
/// unit-normalized at the end and assignments recomputed against the stored
/// centroids (ties to the smallest centroid index).
KmeansResult kmeans(const Eigen::Ref<const RowMatrixXf>& points, int C, int iterations,
                    std::uint64_t seed);

/// FNV-1a over ids and raw float bytes; identifies the corpus an index was
/// built from.
std::uint64_t corpus_hash(const std::vector<TokenMatrix>& corpus);

FlatFdeIndex build_flat_index(const std::vector<TokenMatrix>& corpus,
                              const EncodingConfig& config);

/// C <= 0 selects the default centroid count round(4 * sqrt(total tokens)).
PlaidLiteIndex build_plaid_lite(const std::vector<TokenMatrix>& corpus, int C,
                                std::uint64_t seed);
int default_centroid_count(std::int64_t total_tokens);

void save_index(const FlatFdeIndex& index, const std::string& path);
void save_index(const PlaidLiteIndex& index, const std::string& path);
IndexKind peek_index_kind(const std::string& path);
FlatFdeIndex load_flat_index(const std::string& path);
PlaidLiteIndex load_plaid_index(const std::string& path);

/// Exhaustive float32 inner-product scan over the FDE rows; top_k by
/// (score desc, doc id asc).
std::vector<RunEntry> search_flat(const FlatFdeIndex& index, const FdeVector& qf,
                                  int top_k);

/// PLAID-lite candidate generation: each document scored by the quantized
/// MaxSim sum over the query tokens of the best dot product among the
/// document's distinct centroids.
std::vector<RunEntry> plaid_candidates(const PlaidLiteIndex& index, const TokenMatrix& q,
                                       int n_candidates);

}  // namespace lir
