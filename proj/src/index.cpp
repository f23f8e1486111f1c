#include "lir/index.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "lir/fde.hpp"
#include "lir/rng.hpp"
#include "lir/scoring.hpp"

namespace lir {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// ---- k-means internals ----------------------------------------------------

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Nearest centroid per point, ties to the smallest centroid index. Blocked so
// the N x C distance matrix never materializes at once.
std::vector<int> nearest_centroids(const Eigen::Ref<const RowMatrixXf>& points,
                                   const RowMatrixXf& centroids,
                                   Eigen::VectorXf* out_dist2 = nullptr) {
  const Eigen::Index n = points.rows();
  const Eigen::Index c = centroids.rows();
  const Eigen::VectorXf centroid_sq = centroids.rowwise().squaredNorm();
  const Eigen::VectorXf point_sq = points.rowwise().squaredNorm();
  std::vector<int> assign(static_cast<std::size_t>(n), 0);
  if (out_dist2) out_dist2->resize(n);

  constexpr Eigen::Index kBlock = 4096;
  RowMatrixXf dots;
  for (Eigen::Index start = 0; start < n; start += kBlock) {
    const Eigen::Index rows = std::min(kBlock, n - start);
    dots.noalias() = points.middleRows(start, rows) * centroids.transpose();
    for (Eigen::Index i = 0; i < rows; ++i) {
      Eigen::Index best = 0;
      // ||x - c||^2 = ||x||^2 + ||c||^2 - 2<x,c>; ||x||^2 is constant per row.
      const float objective =
          (centroid_sq.transpose() - 2.0f * dots.row(i)).minCoeff(&best);
      assign[static_cast<std::size_t>(start + i)] = static_cast<int>(best);
      if (out_dist2)
        (*out_dist2)(start + i) = std::max(0.0f, point_sq(start + i) + objective);
    }
  }
  (void)c;
  return assign;
}

RowMatrixXf kmeanspp_seed(const Eigen::Ref<const RowMatrixXf>& points, int C,
                          SplitMix64& rng) {
  const Eigen::Index n = points.rows();
  RowMatrixXf centroids(C, points.cols());
  std::vector<char> chosen(static_cast<std::size_t>(n), 0);

  const Eigen::Index first = static_cast<Eigen::Index>(
      rng.next_below(static_cast<std::uint64_t>(n)));
  centroids.row(0) = points.row(first);
  chosen[static_cast<std::size_t>(first)] = 1;

  Eigen::VectorXd dist2 =
      (points.rowwise() - points.row(first)).rowwise().squaredNorm().cast<double>();

  for (int j = 1; j < C; ++j) {
    const double total = dist2.sum();
    Eigen::Index pick = -1;
    if (total > 0.0) {
      const double target = rng.next_unit() * total;
      double cum = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        cum += dist2(i);
        if (cum > target) {
          pick = i;
          break;
        }
      }
      if (pick < 0) {  // target landed on accumulated rounding; take the last weighted point
        for (Eigen::Index i = n - 1; i >= 0; --i)
          if (dist2(i) > 0.0) {
            pick = i;
            break;
          }
      }
    }
    if (pick < 0) {  // all remaining points coincide with centroids
      for (Eigen::Index i = 0; i < n; ++i)
        if (!chosen[static_cast<std::size_t>(i)]) {
          pick = i;
          break;
        }
    }
    centroids.row(j) = points.row(pick);
    chosen[static_cast<std::size_t>(pick)] = 1;
    dist2 = dist2.cwiseMin(
        (points.rowwise() - points.row(pick)).rowwise().squaredNorm().cast<double>());
  }
  return centroids;
}

// Re-seeds every empty cluster from the farthest point (ties to the smallest
// point index); each point is spent at most once per call.
void reseed_empty(const Eigen::Ref<const RowMatrixXf>& points, RowMatrixXf& centroids,
                  const std::vector<Eigen::Index>& counts, Eigen::VectorXf& dist2) {
  for (int c = 0; c < centroids.rows(); ++c) {
    if (counts[static_cast<std::size_t>(c)] > 0) continue;
    Eigen::Index farthest = 0;
    dist2.maxCoeff(&farthest);
    centroids.row(c) = points.row(farthest);
    dist2(farthest) = -1.0f;
  }
}

// ---- binary helpers (same conventions as the embedding format) ------------

void put_bytes(std::ostream& out, const void* data, std::size_t n) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

void put_u16(std::ostream& out, std::uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  put_bytes(out, b, 2);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  put_bytes(out, b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  put_bytes(out, b, 8);
}

void put_f32_block(std::ostream& out, const float* values, std::size_t count) {
  if constexpr (std::endian::native == std::endian::little) {
    put_bytes(out, values, count * 4);
  } else {
    for (std::size_t i = 0; i < count; ++i)
      put_u32(out, std::bit_cast<std::uint32_t>(values[i]));
  }
}

struct IndexReader {
  std::ifstream in;
  std::string path;

  explicit IndexReader(const std::string& p) : in(p, std::ios::binary), path(p) {
    if (!in) throw IoError("cannot open index: " + p);
  }

  void read_bytes(void* data, std::size_t n) {
    in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n)
      throw IoError("truncated index: " + path);
  }

  std::uint16_t read_u16() {
    unsigned char b[2];
    read_bytes(b, 2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
  }

  std::uint32_t read_u32() {
    unsigned char b[4];
    read_bytes(b, 4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }

  std::uint64_t read_u64() {
    unsigned char b[8];
    read_bytes(b, 8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }

  void read_f32_block(float* values, std::size_t count) {
    if constexpr (std::endian::native == std::endian::little) {
      read_bytes(values, count * 4);
    } else {
      for (std::size_t i = 0; i < count; ++i)
        values[i] = std::bit_cast<float>(read_u32());
    }
  }

  std::string read_id() {
    const std::uint16_t len = read_u16();
    std::string id(len, '\0');
    if (len > 0) read_bytes(id.data(), len);
    return id;
  }
};

IndexKind read_index_header(IndexReader& r) {
  char magic[4];
  r.read_bytes(magic, 4);
  if (std::memcmp(magic, kIndexMagic, 4) != 0)
    throw IoError("bad magic in index " + r.path);
  const std::uint16_t version = r.read_u16();
  if (version != kIndexVersion)
    throw IoError("unsupported index version " + std::to_string(version) + " in " +
                  r.path);
  std::uint8_t kind = 0;
  r.read_bytes(&kind, 1);
  if (kind != static_cast<std::uint8_t>(IndexKind::Flat) &&
      kind != static_cast<std::uint8_t>(IndexKind::PlaidLite))
    throw IoError("unknown index kind byte in " + r.path);
  return static_cast<IndexKind>(kind);
}

void write_id(std::ostream& out, const std::string& id) {
  if (id.size() > 0xffff) throw IoError("doc id too long for index record");
  put_u16(out, static_cast<std::uint16_t>(id.size()));
  put_bytes(out, id.data(), id.size());
}

void check_uniform_dim(const std::vector<TokenMatrix>& corpus, int d) {
  for (const TokenMatrix& m : corpus)
    if (m.dim() != d)
      throw IoError("corpus dimension mismatch: '" + m.id + "' has d=" +
                    std::to_string(m.dim()) + ", expected " + std::to_string(d));
}

std::vector<int> distinct_sorted(const std::vector<int>& ids) {
  std::vector<int> out = ids;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

std::int64_t PlaidLiteIndex::total_tokens() const {
  std::int64_t total = 0;
  for (const TokenMatrix& m : docs) total += m.tokens();
  return total;
}

KmeansResult kmeans(const Eigen::Ref<const RowMatrixXf>& points, int C, int iterations,
                    std::uint64_t seed) {
  const Eigen::Index n = points.rows();
  if (n == 0) throw ConfigError("kmeans: no points");
  if (C < 1 || C > n)
    throw ConfigError("kmeans: C=" + std::to_string(C) + " out of range [1, " +
                      std::to_string(n) + "]");
  if (iterations < 1) throw ConfigError("kmeans: iterations must be >= 1");

  SplitMix64 rng(hash_combine(seed, stream_tag::kKmeans));
  KmeansResult result;
  result.centroids = kmeanspp_seed(points, C, rng);
  Eigen::VectorXf dist2;
  result.assignments = nearest_centroids(points, result.centroids, &dist2);

  RowMatrixXd sums(C, points.cols());
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(C));
  for (int it = 0; it < iterations; ++it) {
    ++result.iterations_run;
    sums.setZero();
    std::fill(counts.begin(), counts.end(), Eigen::Index{0});
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = result.assignments[static_cast<std::size_t>(i)];
      sums.row(c) += points.row(i).cast<double>();
      ++counts[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < C; ++c)
      if (counts[static_cast<std::size_t>(c)] > 0)
        result.centroids.row(c) =
            (sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]))
                .cast<float>();
    reseed_empty(points, result.centroids, counts, dist2);

    std::vector<int> next = nearest_centroids(points, result.centroids, &dist2);
    const bool stable = next == result.assignments;
    result.assignments = std::move(next);
    if (stable) break;
  }

  // Stored centroids are unit vectors; assignments must be nearest under the
  // stored centroids, so reassign once after normalizing.
  for (int c = 0; c < C; ++c) {
    const float norm = result.centroids.row(c).norm();
    if (norm > 0.0f) {
      if (std::abs(norm - 1.0f) > 1e-6f) result.centroids.row(c) /= norm;
    } else {
      Eigen::Index farthest = 0;
      dist2.maxCoeff(&farthest);
      result.centroids.row(c) = points.row(farthest);
      dist2(farthest) = -1.0f;
    }
  }
  result.assignments = nearest_centroids(points, result.centroids);
  return result;
}

std::uint64_t corpus_hash(const std::vector<TokenMatrix>& corpus) {
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
  auto absorb = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ull;
    }
  };
  for (const TokenMatrix& m : corpus) {
    absorb(m.id.data(), m.id.size());
    const std::uint32_t n = static_cast<std::uint32_t>(m.tokens());
    const std::uint32_t d = static_cast<std::uint32_t>(m.dim());
    absorb(&n, 4);
    absorb(&d, 4);
    absorb(m.rows.data(), static_cast<std::size_t>(m.rows.size()) * 4);
  }
  return h;
}

FlatFdeIndex build_flat_index(const std::vector<TokenMatrix>& corpus,
                              const EncodingConfig& config) {
  if (corpus.empty()) throw IoError("build_flat_index: empty corpus");
  config.validate();
  check_uniform_dim(corpus, config.d);

  const auto start = Clock::now();
  FlatFdeIndex index;
  index.config = config;
  const Eigen::Index dim = static_cast<Eigen::Index>(fde_dim(config));
  index.fdes.resize(static_cast<Eigen::Index>(corpus.size()), dim);
  index.doc_ids.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    index.doc_ids.push_back(corpus[i].id);
    index.fdes.row(static_cast<Eigen::Index>(i)) =
        encode_document(corpus[i], config).values;
  }
  index.corpus_hash = corpus_hash(corpus);
  index.build_ms = elapsed_ms(start);
  return index;
}

int default_centroid_count(std::int64_t total_tokens) {
  const auto c = static_cast<std::int64_t>(
      std::llround(4.0 * std::sqrt(static_cast<double>(total_tokens))));
  return static_cast<int>(std::clamp<std::int64_t>(c, 1, total_tokens));
}

PlaidLiteIndex build_plaid_lite(const std::vector<TokenMatrix>& corpus, int C,
                                std::uint64_t seed) {
  if (corpus.empty()) throw IoError("build_plaid_lite: empty corpus");
  const int d = static_cast<int>(corpus.front().dim());
  check_uniform_dim(corpus, d);

  const auto start = Clock::now();
  std::int64_t total = 0;
  for (const TokenMatrix& m : corpus) total += m.tokens();
  if (C <= 0) C = default_centroid_count(total);
  if (C > total)
    throw ConfigError("build_plaid_lite: C=" + std::to_string(C) + " exceeds token count " +
                      std::to_string(total));

  RowMatrixXf points(static_cast<Eigen::Index>(total), d);
  Eigen::Index row = 0;
  for (const TokenMatrix& m : corpus) {
    points.middleRows(row, m.tokens()) = m.rows;
    row += m.tokens();
  }

  KmeansResult km = kmeans(points, C, 20, seed);

  PlaidLiteIndex index;
  index.d = d;
  index.seed = seed;
  index.centroids = std::move(km.centroids);
  index.docs = corpus;
  index.assignments.reserve(corpus.size());
  index.doc_centroids.reserve(corpus.size());
  std::size_t offset = 0;
  for (const TokenMatrix& m : corpus) {
    const auto count = static_cast<std::size_t>(m.tokens());
    std::vector<int> ids(km.assignments.begin() + static_cast<std::ptrdiff_t>(offset),
                         km.assignments.begin() +
                             static_cast<std::ptrdiff_t>(offset + count));
    offset += count;
    index.doc_centroids.push_back(distinct_sorted(ids));
    index.assignments.push_back(std::move(ids));
  }
  index.corpus_hash = corpus_hash(corpus);
  index.build_ms = elapsed_ms(start);
  return index;
}

void save_index(const FlatFdeIndex& index, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write index: " + path);
  put_bytes(out, kIndexMagic, 4);
  put_u16(out, kIndexVersion);
  const std::uint8_t kind = static_cast<std::uint8_t>(IndexKind::Flat);
  put_bytes(out, &kind, 1);
  put_u32(out, static_cast<std::uint32_t>(index.config.d));
  put_u32(out, static_cast<std::uint32_t>(index.config.k_sim));
  put_u32(out, static_cast<std::uint32_t>(index.config.repetitions));
  const std::uint8_t proj = static_cast<std::uint8_t>(index.config.projection);
  put_bytes(out, &proj, 1);
  put_u32(out, static_cast<std::uint32_t>(index.config.sketch_dim));
  put_u64(out, index.config.seed);
  put_u64(out, index.corpus_hash);
  put_u64(out, static_cast<std::uint64_t>(index.num_docs()));
  put_u64(out, static_cast<std::uint64_t>(index.fdes.cols()));
  for (const std::string& id : index.doc_ids) write_id(out, id);
  put_f32_block(out, index.fdes.data(), static_cast<std::size_t>(index.fdes.size()));
  if (!out) throw IoError("write failure: " + path);
}

void save_index(const PlaidLiteIndex& index, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write index: " + path);
  put_bytes(out, kIndexMagic, 4);
  put_u16(out, kIndexVersion);
  const std::uint8_t kind = static_cast<std::uint8_t>(IndexKind::PlaidLite);
  put_bytes(out, &kind, 1);
  put_u32(out, static_cast<std::uint32_t>(index.d));
  put_u64(out, index.seed);
  put_u64(out, index.corpus_hash);
  put_u64(out, static_cast<std::uint64_t>(index.centroids.rows()));
  put_u64(out, static_cast<std::uint64_t>(index.docs.size()));
  put_f32_block(out, index.centroids.data(),
                static_cast<std::size_t>(index.centroids.size()));
  for (std::size_t i = 0; i < index.docs.size(); ++i) {
    const TokenMatrix& m = index.docs[i];
    write_id(out, m.id);
    put_u32(out, static_cast<std::uint32_t>(m.tokens()));
    for (const int a : index.assignments[i])
      put_u32(out, static_cast<std::uint32_t>(a));
    put_f32_block(out, m.rows.data(), static_cast<std::size_t>(m.rows.size()));
  }
  if (!out) throw IoError("write failure: " + path);
}

IndexKind peek_index_kind(const std::string& path) {
  IndexReader r(path);
  return read_index_header(r);
}

FlatFdeIndex load_flat_index(const std::string& path) {
  IndexReader r(path);
  if (read_index_header(r) != IndexKind::Flat)
    throw ConfigError("index " + path + " is not a flat FDE index");
  FlatFdeIndex index;
  index.config.d = static_cast<int>(r.read_u32());
  index.config.k_sim = static_cast<int>(r.read_u32());
  index.config.repetitions = static_cast<int>(r.read_u32());
  std::uint8_t proj = 0;
  r.read_bytes(&proj, 1);
  index.config.projection = static_cast<Projection>(proj);
  index.config.sketch_dim = static_cast<int>(r.read_u32());
  index.config.seed = r.read_u64();
  index.config.validate();
  index.corpus_hash = r.read_u64();
  const std::uint64_t num_docs = r.read_u64();
  const std::uint64_t dim = r.read_u64();
  if (dim != static_cast<std::uint64_t>(fde_dim(index.config)))
    throw IoError("index " + path + " dimension does not match its config");
  index.doc_ids.reserve(num_docs);
  for (std::uint64_t i = 0; i < num_docs; ++i) index.doc_ids.push_back(r.read_id());
  index.fdes.resize(static_cast<Eigen::Index>(num_docs), static_cast<Eigen::Index>(dim));
  r.read_f32_block(index.fdes.data(), static_cast<std::size_t>(index.fdes.size()));
  return index;
}

PlaidLiteIndex load_plaid_index(const std::string& path) {
  IndexReader r(path);
  if (read_index_header(r) != IndexKind::PlaidLite)
    throw ConfigError("index " + path + " is not a PLAID-lite index");
  PlaidLiteIndex index;
  index.d = static_cast<int>(r.read_u32());
  index.seed = r.read_u64();
  index.corpus_hash = r.read_u64();
  const std::uint64_t C = r.read_u64();
  const std::uint64_t num_docs = r.read_u64();
  index.centroids.resize(static_cast<Eigen::Index>(C), index.d);
  r.read_f32_block(index.centroids.data(),
                   static_cast<std::size_t>(index.centroids.size()));
  index.docs.reserve(num_docs);
  index.assignments.reserve(num_docs);
  index.doc_centroids.reserve(num_docs);
  for (std::uint64_t i = 0; i < num_docs; ++i) {
    TokenMatrix m;
    m.id = r.read_id();
    const std::uint32_t n = r.read_u32();
    std::vector<int> ids(n);
    for (std::uint32_t t = 0; t < n; ++t) {
      const std::uint32_t a = r.read_u32();
      if (a >= C) throw IoError("assignment out of range in index " + path);
      ids[t] = static_cast<int>(a);
    }
    m.rows.resize(static_cast<Eigen::Index>(n), index.d);
    r.read_f32_block(m.rows.data(), static_cast<std::size_t>(m.rows.size()));
    index.doc_centroids.push_back(distinct_sorted(ids));
    index.assignments.push_back(std::move(ids));
    index.docs.push_back(std::move(m));
  }
  return index;
}

std::vector<RunEntry> search_flat(const FlatFdeIndex& index, const FdeVector& qf,
                                  int top_k) {
  if (qf.role != Role::Query) throw ConfigError("search_flat expects a Query FDE");
  if (qf.dim() != index.fdes.cols())
    throw IoError("query FDE dimension " + std::to_string(qf.dim()) +
                  " does not match index D=" + std::to_string(index.fdes.cols()));
  if (top_k < 1) throw ConfigError("search_flat: top_k must be >= 1");

  const Eigen::VectorXf scores = index.fdes * qf.values;
  std::vector<RunEntry> entries;
  entries.reserve(index.doc_ids.size());
  for (std::size_t i = 0; i < index.doc_ids.size(); ++i)
    entries.push_back(
        {index.doc_ids[i], static_cast<double>(scores(static_cast<Eigen::Index>(i)))});
  const std::size_t keep = std::min(static_cast<std::size_t>(top_k), entries.size());
  std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(keep),
                    entries.end(), run_entry_less);
  entries.resize(keep);
  return entries;
}

std::vector<RunEntry> plaid_candidates(const PlaidLiteIndex& index, const TokenMatrix& q,
                                       int n_candidates) {
  if (q.dim() != index.d)
    throw IoError("query dimension " + std::to_string(q.dim()) +
                  " does not match index d=" + std::to_string(index.d));
  if (n_candidates < 1) throw ConfigError("plaid_candidates: n_candidates must be >= 1");

  const RowMatrixXf sims = q.rows * index.centroids.transpose();  // n_q x C
  std::vector<RunEntry> entries;
  entries.reserve(index.docs.size());
  for (std::size_t doc = 0; doc < index.docs.size(); ++doc) {
    const std::vector<int>& ids = index.doc_centroids[doc];
    double score = 0.0;
    for (Eigen::Index i = 0; i < sims.rows(); ++i) {
      float best = -std::numeric_limits<float>::infinity();
      for (const int c : ids) best = std::max(best, sims(i, c));
      score += static_cast<double>(best);
    }
    entries.push_back({index.docs[doc].id, score});
  }
  const std::size_t keep = std::min(static_cast<std::size_t>(n_candidates), entries.size());
  std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(keep),
                    entries.end(), run_entry_less);
  entries.resize(keep);
  return entries;
}

}  // namespace lir
