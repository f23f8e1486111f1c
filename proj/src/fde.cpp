#include "lir/fde.hpp"

#include <bit>
#include <limits>

#include "lir/rng.hpp"

namespace lir {

namespace {

std::uint64_t plane_key(std::uint64_t seed, int repetition, int plane) {
  return hash_combine(hash_combine(hash_combine(seed, stream_tag::kSimHashPlane),
                                   static_cast<std::uint64_t>(repetition)),
                      static_cast<std::uint64_t>(plane));
}

std::uint64_t sketch_key(std::uint64_t seed, int repetition, int partition) {
  return hash_combine(hash_combine(hash_combine(seed, stream_tag::kSketch),
                                   static_cast<std::uint64_t>(repetition)),
                      static_cast<std::uint64_t>(partition));
}

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Shared by encode_document / encode_query; queries sum, documents average
// and impute.
FdeVector encode(const TokenMatrix& m, const EncodingConfig& config, Role role) {
  validate_token_matrix(m);
  config.validate();
  if (m.dim() != config.d)
    throw IoError("token matrix '" + m.id + "' dimension " + std::to_string(m.dim()) +
                  " does not match encoding d=" + std::to_string(config.d));

  const int partitions = config.num_partitions();
  const int proj_dim = config.proj_dim();
  const Eigen::Index n = m.tokens();

  FdeVector out;
  out.id = m.id;
  out.role = role;
  out.values.resize(fde_dim(config));

  for (int rep = 0; rep < config.repetitions; ++rep) {
    const SimHashPlanes planes = make_planes(config, rep);
    const PartitionAssignment assignment = assign_partitions(m, planes, config.k_sim);

    // Accumulate in double, token-index order, so values are stable to ~1e-12
    // regardless of how callers parallelize across documents.
    RowMatrixXd sums = RowMatrixXd::Zero(partitions, proj_dim);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int p = assignment.partition_of[static_cast<std::size_t>(i)];
      if (config.projection == Projection::Identity) {
        sums.row(p) += m.rows.row(i).cast<double>();
      } else {
        sums.row(p) += inner_project(m.rows.row(i), config, rep, p).cast<double>();
      }
    }

    RowMatrixXf blocks(partitions, proj_dim);
    std::vector<char> nonempty(static_cast<std::size_t>(partitions), 0);
    for (int p = 0; p < partitions; ++p) {
      const auto count = assignment.members[static_cast<std::size_t>(p)].size();
      if (count > 0) {
        nonempty[static_cast<std::size_t>(p)] = 1;
        if (role == Role::Document)
          blocks.row(p) = (sums.row(p) / static_cast<double>(count)).cast<float>();
        else
          blocks.row(p) = sums.row(p).cast<float>();
      } else {
        blocks.row(p).setZero();
      }
    }

    if (role == Role::Document) impute_empty(blocks, nonempty, config.k_sim);

    const Eigen::Index rep_offset =
        static_cast<Eigen::Index>(rep) * partitions * proj_dim;
    for (int p = 0; p < partitions; ++p)
      out.values.segment(rep_offset + static_cast<Eigen::Index>(p) * proj_dim,
                         proj_dim) = blocks.row(p);
  }
  return out;
}

}  // namespace

SimHashPlanes make_planes(const EncodingConfig& config, int repetition) {
  config.validate();
  if (repetition < 0 || repetition >= config.repetitions)
    throw ConfigError("repetition " + std::to_string(repetition) +
                      " out of range (repetitions=" + std::to_string(config.repetitions) +
                      ")");
  SimHashPlanes planes;
  planes.directions.resize(config.k_sim, config.d);
  for (int b = 0; b < config.k_sim; ++b) {
    GaussianStream stream(plane_key(config.seed, repetition, b));
    for (int j = 0; j < config.d; ++j)
      planes.directions(b, j) = static_cast<float>(stream.next());
  }
  return planes;
}

int assign_partition(const Eigen::Ref<const Eigen::RowVectorXf>& e,
                     const SimHashPlanes& planes) {
  if (planes.bits() > 0 && e.size() != planes.directions.cols())
    throw IoError("token dimension " + std::to_string(e.size()) +
                  " does not match plane dimension " +
                  std::to_string(planes.directions.cols()));
  int index = 0;
  for (int b = 0; b < planes.bits(); ++b) {
    // sign(0) counts as negative: bit set only for strictly positive dots.
    if (planes.directions.row(b).dot(e) > 0.0f) index |= 1 << b;
  }
  return index;
}

PartitionAssignment assign_partitions(const TokenMatrix& m, const SimHashPlanes& planes,
                                      int k_sim) {
  PartitionAssignment assignment;
  const Eigen::Index n = m.tokens();
  assignment.partition_of.resize(static_cast<std::size_t>(n));
  assignment.members.resize(std::size_t{1} << k_sim);
  if (k_sim == 0) {
    for (Eigen::Index i = 0; i < n; ++i) {
      assignment.partition_of[static_cast<std::size_t>(i)] = 0;
      assignment.members[0].push_back(static_cast<int>(i));
    }
    return assignment;
  }
  // One GEMM gives every (token, plane) dot product.
  const RowMatrixXf dots = m.rows * planes.directions.transpose();  // n x k_sim
  for (Eigen::Index i = 0; i < n; ++i) {
    int index = 0;
    for (int b = 0; b < k_sim; ++b)
      if (dots(i, b) > 0.0f) index |= 1 << b;
    assignment.partition_of[static_cast<std::size_t>(i)] = index;
    assignment.members[static_cast<std::size_t>(index)].push_back(static_cast<int>(i));
  }
  return assignment;
}

SketchParams make_sketch(const EncodingConfig& config, int repetition, int partition) {
  SketchParams params;
  params.target_dim = config.proj_dim();
  params.signs.resize(config.d);
  params.buckets.resize(static_cast<std::size_t>(config.d));
  SplitMix64 rng(sketch_key(config.seed, repetition, partition));
  for (int i = 0; i < config.d; ++i) {
    params.signs(i) = (rng.next() & 1u) ? 1.0f : -1.0f;
    params.buckets[static_cast<std::size_t>(i)] =
        static_cast<int>(rng.next_below(static_cast<std::uint64_t>(params.target_dim)));
  }
  return params;
}

Eigen::RowVectorXf apply_sketch(const Eigen::Ref<const Eigen::RowVectorXf>& e,
                                const SketchParams& params) {
  if (e.size() != params.signs.size())
    throw IoError("sketch input dimension mismatch");
  Eigen::RowVectorXf out = Eigen::RowVectorXf::Zero(params.target_dim);
  for (Eigen::Index i = 0; i < e.size(); ++i)
    out(params.buckets[static_cast<std::size_t>(i)]) += params.signs(i) * e(i);
  return out;
}

Eigen::RowVectorXf inner_project(const Eigen::Ref<const Eigen::RowVectorXf>& e,
                                 const EncodingConfig& config, int repetition,
                                 int partition) {
  if (e.size() != config.d)
    throw IoError("token dimension " + std::to_string(e.size()) +
                  " does not match encoding d=" + std::to_string(config.d));
  if (config.projection == Projection::Identity) return e;
  return apply_sketch(e, make_sketch(config, repetition, partition));
}

void impute_empty(Eigen::Ref<RowMatrixXf> blocks, const std::vector<char>& nonempty,
                  int k_sim) {
  const int partitions = 1 << k_sim;
  if (blocks.rows() != partitions || static_cast<int>(nonempty.size()) != partitions)
    throw ConfigError("impute_empty: block count does not match 2^k_sim");
  bool any = false;
  for (int p = 0; p < partitions; ++p) any = any || nonempty[static_cast<std::size_t>(p)];
  if (!any) throw ConfigError("impute_empty: all partitions empty");

  for (int p = 0; p < partitions; ++p) {
    if (nonempty[static_cast<std::size_t>(p)]) continue;
    int best = -1;
    int best_dist = std::numeric_limits<int>::max();
    for (int q = 0; q < partitions; ++q) {
      if (!nonempty[static_cast<std::size_t>(q)]) continue;
      const int dist = std::popcount(static_cast<unsigned>(p ^ q));
      if (dist < best_dist) {  // ties keep the smallest q
        best_dist = dist;
        best = q;
      }
    }
    blocks.row(p) = blocks.row(best);
  }
}

FdeVector encode_document(const TokenMatrix& m, const EncodingConfig& config) {
  return encode(m, config, Role::Document);
}

FdeVector encode_query(const TokenMatrix& m, const EncodingConfig& config) {
  return encode(m, config, Role::Query);
}

}  // namespace lir
