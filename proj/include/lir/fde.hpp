#pragma once

#include <vector>

#include "lir/types.hpp"

namespace lir {

/// One repetition's SimHash hyperplanes. Row b holds the Gaussian direction
/// for bit b; bit 0 is the least-significant bit of the partition index.
struct SimHashPlanes {
  RowMatrixXf directions;  // k_sim x d

  int bits() const { return static_cast<int>(directions.rows()); }
};

/// Per-token partition indices plus the inverse partition -> token map.
struct PartitionAssignment {
  std::vector<int> partition_of;          // one entry per token
  std::vector<std::vector<int>> members;  // 2^k_sim lists of token indices
};

/// Deterministic Gaussian planes for (config.seed, repetition). Regenerating
/// with the same key is bit-identical; workers never need to share planes.
SimHashPlanes make_planes(const EncodingConfig& config, int repetition);

/// Partition index of a single token: bit b is 1 iff dot(plane_b, e) > 0.
int assign_partition(const Eigen::Ref<const Eigen::RowVectorXf>& e,
                     const SimHashPlanes& planes);

/// Partition indices for every token of m under one repetition's planes.
PartitionAssignment assign_partitions(const TokenMatrix& m, const SimHashPlanes& planes,
                                      int k_sim);

/// Count-sketch parameters: a random sign per input coordinate and the output
/// bucket it lands in. Derived deterministically from (seed, repetition,
/// partition).
struct SketchParams {
  Eigen::VectorXf signs;     // d entries, each +1 or -1
  std::vector<int> buckets;  // d entries in [0, target_dim)
  int target_dim = 0;
};

SketchParams make_sketch(const EncodingConfig& config, int repetition, int partition);

/// y[bucket[i]] += sign[i] * e[i]. Unbiased for inner products:
/// E[<S(x), S(y)>] = <x, y> over the sign draw.
Eigen::RowVectorXf apply_sketch(const Eigen::Ref<const Eigen::RowVectorXf>& e,
                                const SketchParams& params);

/// Projects one token to proj_dim: identity pass-through or count sketch.
Eigen::RowVectorXf inner_project(const Eigen::Ref<const Eigen::RowVectorXf>& e,
                                 const EncodingConfig& config, int repetition,
                                 int partition);

/// Fills each empty partition block with the block of the Hamming-nearest
/// non-empty partition (ties broken by smallest index). blocks is the
/// 2^k_sim x proj_dim block matrix of one repetition.
void impute_empty(Eigen::Ref<RowMatrixXf> blocks, const std::vector<char>& nonempty,
                  int k_sim);

/// Document encoding: per repetition and partition, the mean of the projected
/// tokens assigned there; empty partitions imputed; blocks concatenated in
/// (repetition-major, partition-ascending) order.
FdeVector encode_document(const TokenMatrix& m, const EncodingConfig& config);

/// Query encoding: same pipeline but blocks are sums and empty partitions
/// stay all-zero.
FdeVector encode_query(const TokenMatrix& m, const EncodingConfig& config);

}  // namespace lir
