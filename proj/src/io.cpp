#include "lir/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "lir/rng.hpp"

namespace lir {

namespace {

// ---- little-endian scalar I/O -------------------------------------------

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

struct Reader {
  std::ifstream in;
  std::string path;

  Reader(const std::string& p, const char* what) : in(p, std::ios::binary), path(p) {
    if (!in) throw IoError(std::string("cannot open ") + what + ": " + p);
  }

  void read_bytes(void* data, std::size_t n, const char* what) {
    in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n)
      throw IoError(std::string("truncated ") + what + " in " + path);
  }

  std::uint16_t read_u16(const char* what) {
    unsigned char b[2];
    read_bytes(b, 2, what);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
  }

  std::uint32_t read_u32(const char* what) {
    unsigned char b[4];
    read_bytes(b, 4, what);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }

  std::uint64_t read_u64(const char* what) {
    unsigned char b[8];
    read_bytes(b, 8, what);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }

  void read_f32_block(float* values, std::size_t count, const char* what) {
    if constexpr (std::endian::native == std::endian::little) {
      read_bytes(values, count * 4, what);
    } else {
      for (std::size_t i = 0; i < count; ++i)
        values[i] = std::bit_cast<float>(read_u32(what));
    }
  }

  bool at_eof() {
    in.peek();
    return in.eof();
  }
};

bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void check_unique_id(std::unordered_set<std::string>& seen, const std::string& id,
                     const std::string& path) {
  if (!seen.insert(id).second)
    throw IoError("duplicate id '" + id + "' in " + path);
}

std::vector<TokenMatrix> load_embeddings_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embeddings: " + path);
  std::vector<TokenMatrix> out;
  std::unordered_set<std::string> seen;
  Eigen::Index d = -1;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw IoError(path + ":" + std::to_string(line_no) + ": bad JSON: " + e.what());
    }
    if (!obj.is_object() || !obj.contains("id") || !obj.contains("vectors"))
      throw IoError(path + ":" + std::to_string(line_no) +
                    ": expected object with \"id\" and \"vectors\"");
    TokenMatrix m;
    m.id = obj["id"].get<std::string>();
    check_unique_id(seen, m.id, path);
    const auto& vectors = obj["vectors"];
    if (!vectors.is_array() || vectors.empty())
      throw IoError(path + ":" + std::to_string(line_no) + ": empty token matrix '" +
                    m.id + "'");
    const Eigen::Index n = static_cast<Eigen::Index>(vectors.size());
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& row = vectors[static_cast<std::size_t>(i)];
      if (!row.is_array())
        throw IoError(path + ":" + std::to_string(line_no) + ": row is not an array");
      const Eigen::Index row_d = static_cast<Eigen::Index>(row.size());
      if (d < 0) d = row_d;
      if (row_d != d)
        throw IoError(path + ":" + std::to_string(line_no) + ": d mismatch in '" +
                      m.id + "' (" + std::to_string(row_d) + " vs " + std::to_string(d) +
                      ")");
      if (i == 0) m.rows.resize(n, d);
      for (Eigen::Index j = 0; j < d; ++j)
        m.rows(i, j) = static_cast<float>(row[static_cast<std::size_t>(j)].get<double>());
    }
    l2_normalize_rows(m.rows, m.id);
    validate_token_matrix(m);
    out.push_back(std::move(m));
  }
  return out;
}

void write_embeddings_jsonl(const std::vector<TokenMatrix>& ms, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write embeddings: " + path);
  for (const TokenMatrix& m : ms) {
    nlohmann::json obj;
    obj["id"] = m.id;
    nlohmann::json vectors = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index j = 0; j < m.rows.cols(); ++j)
        row.push_back(static_cast<double>(m.rows(i, j)));
      vectors.push_back(std::move(row));
    }
    obj["vectors"] = std::move(vectors);
    out << obj.dump() << '\n';
  }
  if (!out) throw IoError("write failure: " + path);
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream stream(line);
  std::vector<std::string> fields;
  std::string f;
  while (stream >> f) fields.push_back(f);
  return fields;
}

}  // namespace

std::vector<TokenMatrix> load_embeddings(const std::string& path) {
  if (has_suffix(path, ".jsonl")) return load_embeddings_jsonl(path);

  Reader r(path, "embeddings");
  char magic[4];
  r.read_bytes(magic, 4, "header");
  if (std::memcmp(magic, kEmbeddingMagic, 4) != 0)
    throw IoError("bad magic in " + path);
  const std::uint16_t version = r.read_u16("header");
  if (version != kEmbeddingVersion)
    throw IoError("unsupported embeddings version " + std::to_string(version) + " in " +
                  path);
  const std::uint32_t d = r.read_u32("header");
  if (d < 1) throw IoError("header d must be >= 1 in " + path);
  const std::uint64_t record_count = r.read_u64("header");

  std::vector<TokenMatrix> out;
  out.reserve(record_count);
  std::unordered_set<std::string> seen;
  for (std::uint64_t rec = 0; rec < record_count; ++rec) {
    TokenMatrix m;
    const std::uint16_t id_len = r.read_u16("record");
    m.id.resize(id_len);
    if (id_len > 0) r.read_bytes(m.id.data(), id_len, "record");
    check_unique_id(seen, m.id, path);
    const std::uint32_t n = r.read_u32("record");
    if (n < 1) throw IoError("empty token matrix '" + m.id + "' in " + path);
    m.rows.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    r.read_f32_block(m.rows.data(), static_cast<std::size_t>(n) * d, "record");
    l2_normalize_rows(m.rows, m.id);
    validate_token_matrix(m);
    out.push_back(std::move(m));
  }
  if (!r.at_eof()) throw IoError("trailing bytes after last record in " + path);
  return out;
}

void write_embeddings(const std::vector<TokenMatrix>& ms, const std::string& path) {
  Eigen::Index d = ms.empty() ? 1 : ms.front().dim();
  for (const TokenMatrix& m : ms)
    if (m.dim() != d)
      throw IoError("mixed dimensions in write_embeddings: '" + m.id + "' has d=" +
                    std::to_string(m.dim()) + ", expected " + std::to_string(d));

  if (has_suffix(path, ".jsonl")) {
    write_embeddings_jsonl(ms, path);
    return;
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write embeddings: " + path);
  put_bytes(out, kEmbeddingMagic, 4);
  put_u16(out, kEmbeddingVersion);
  put_u32(out, static_cast<std::uint32_t>(d));
  put_u64(out, ms.size());
  for (const TokenMatrix& m : ms) {
    if (m.id.size() > 0xffff)
      throw IoError("id too long for embeddings record: '" + m.id.substr(0, 32) + "...'");
    put_u16(out, static_cast<std::uint16_t>(m.id.size()));
    put_bytes(out, m.id.data(), m.id.size());
    put_u32(out, static_cast<std::uint32_t>(m.rows.rows()));
    put_f32_block(out, m.rows.data(),
                  static_cast<std::size_t>(m.rows.rows()) * m.rows.cols());
  }
  if (!out) throw IoError("write failure: " + path);
}

Qrels load_qrels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open qrels: " + path);
  Qrels qrels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (fields.size() != 4)
      throw IoError(path + ":" + std::to_string(line_no) +
                    ": malformed qrels line (expected 4 fields, got " +
                    std::to_string(fields.size()) + ")");
    int grade = 0;
    try {
      std::size_t pos = 0;
      grade = std::stoi(fields[3], &pos);
      if (pos != fields[3].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw IoError(path + ":" + std::to_string(line_no) + ": bad grade '" + fields[3] +
                    "'");
    }
    if (grade < 0)
      throw IoError(path + ":" + std::to_string(line_no) + ": negative grade");
    auto& by_doc = qrels[fields[0]];
    const auto it = by_doc.find(fields[2]);
    if (it != by_doc.end() && it->second != grade)
      throw IoError(path + ":" + std::to_string(line_no) + ": conflicting judgment for (" +
                    fields[0] + ", " + fields[2] + ")");
    by_doc[fields[2]] = grade;
  }
  return qrels;
}

void write_qrels(const Qrels& qrels, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write qrels: " + path);
  for (const auto& [qid, by_doc] : qrels)
    for (const auto& [doc_id, grade] : by_doc)
      out << qid << " 0 " << doc_id << ' ' << grade << '\n';
  if (!out) throw IoError("write failure: " + path);
}

void write_run(const RunResult& run, const std::string& tag, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write run: " + path);
  char score_buf[64];
  for (const auto& [qid, entries] : run) {
    int rank = 1;
    for (const RunEntry& e : entries) {
      std::snprintf(score_buf, sizeof(score_buf), "%.6f", e.score);
      out << qid << " Q0 " << e.doc_id << ' ' << rank++ << ' ' << score_buf << ' ' << tag
          << '\n';
    }
  }
  if (!out) throw IoError("write failure: " + path);
}

RunResult load_run(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open run: " + path);
  std::map<std::string, std::vector<std::pair<long, RunEntry>>> by_query;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (fields.size() != 6)
      throw IoError(path + ":" + std::to_string(line_no) +
                    ": malformed run line (expected 6 fields, got " +
                    std::to_string(fields.size()) + ")");
    long rank = 0;
    double score = 0.0;
    try {
      rank = std::stol(fields[3]);
      score = std::stod(fields[4]);
    } catch (const std::exception&) {
      throw IoError(path + ":" + std::to_string(line_no) + ": bad rank or score");
    }
    by_query[fields[0]].push_back({rank, {fields[2], score}});
  }
  RunResult run;
  for (auto& [qid, entries] : by_query) {
    std::stable_sort(entries.begin(), entries.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    auto& out = run[qid];
    std::unordered_set<std::string> seen;
    out.reserve(entries.size());
    for (auto& [rank, entry] : entries) {
      if (!seen.insert(entry.doc_id).second)
        throw IoError(path + ": duplicate doc '" + entry.doc_id + "' for query '" + qid +
                      "'");
      out.push_back(std::move(entry));
    }
  }
  return run;
}

namespace {

// Planted-signal mixing weights. 0.75 puts the shared direction well above
// the noise floor for any d >= 8 while leaving per-token variety.
constexpr double kPlantMix = 0.75;

std::string padded_id(char prefix, int value, int width) {
  std::string digits = std::to_string(value);
  std::string out(1, prefix);
  out.append(static_cast<std::size_t>(width) - std::min<std::size_t>(
                                                   digits.size(),
                                                   static_cast<std::size_t>(width)),
             '0');
  out += digits;
  return out;
}

int id_width(int count) {
  int width = 1;
  for (int v = count - 1; v >= 10; v /= 10) ++width;
  return width;
}

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

RowMatrixXd random_unit_rows(GaussianStream& stream, int n, int d) {
  RowMatrixXd rows(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) rows(i, j) = stream.next();
    rows.row(i).normalize();
  }
  return rows;
}

void mix_direction(RowMatrixXd& rows, int row, const Eigen::RowVectorXd& direction) {
  rows.row(row) = kPlantMix * direction + (1.0 - kPlantMix) * rows.row(row);
  rows.row(row).normalize();
}

TokenMatrix to_token_matrix(std::string id, const RowMatrixXd& rows) {
  TokenMatrix m;
  m.id = std::move(id);
  m.rows = rows.cast<float>();
  l2_normalize_rows(m.rows, m.id);
  return m;
}

}  // namespace

SyntheticData gen_synthetic_corpus(int num_docs, int tokens_per_doc, int num_queries,
                                   int d, int relevant_per_query, std::uint64_t seed) {
  if (num_docs < 1 || tokens_per_doc < 1 || num_queries < 1 || d < 1 ||
      relevant_per_query < 1)
    throw ConfigError("gen_synthetic_corpus: all sizes must be >= 1");
  if (relevant_per_query > num_docs)
    throw ConfigError("gen_synthetic_corpus: relevant_per_query exceeds num_docs");

  GaussianStream doc_stream(hash_combine(hash_combine(seed, stream_tag::kSynthetic), 1));
  GaussianStream query_stream(hash_combine(hash_combine(seed, stream_tag::kSynthetic), 2));
  SplitMix64 pick_stream(hash_combine(hash_combine(seed, stream_tag::kSynthetic), 3));
  GaussianStream direction_stream(
      hash_combine(hash_combine(seed, stream_tag::kSynthetic), 4));

  std::vector<RowMatrixXd> docs;
  docs.reserve(static_cast<std::size_t>(num_docs));
  for (int i = 0; i < num_docs; ++i)
    docs.push_back(random_unit_rows(doc_stream, tokens_per_doc, d));
  std::vector<int> doc_plant_offset(static_cast<std::size_t>(num_docs), 0);

  const int doc_plant_count = std::max(1, tokens_per_doc / 2);
  const int doc_width = id_width(num_docs);
  const int query_width = id_width(num_queries);

  SyntheticData data;
  std::vector<int> choices(static_cast<std::size_t>(num_docs));

  for (int q = 0; q < num_queries; ++q) {
    RowMatrixXd query = random_unit_rows(query_stream, tokens_per_doc, d);
    const std::string qid = padded_id('q', q, query_width);

    // Distinct relevant docs via a partial Fisher-Yates pass.
    std::iota(choices.begin(), choices.end(), 0);
    for (int j = 0; j < relevant_per_query; ++j) {
      const auto swap_at =
          j + static_cast<int>(pick_stream.next_below(
                  static_cast<std::uint64_t>(num_docs - j)));
      std::swap(choices[static_cast<std::size_t>(j)],
                choices[static_cast<std::size_t>(swap_at)]);
    }

    for (int j = 0; j < relevant_per_query; ++j) {
      const int doc = choices[static_cast<std::size_t>(j)];
      Eigen::RowVectorXd direction(d);
      for (int c = 0; c < d; ++c) direction(c) = direction_stream.next();
      direction.normalize();

      // Query tokens round-robin across this query's relevant docs.
      for (int t = j; t < tokens_per_doc; t += relevant_per_query)
        mix_direction(query, t, direction);

      // Document side: plant into a rotating half of the tokens so a doc
      // relevant to several queries keeps every signal.
      auto& offset = doc_plant_offset[static_cast<std::size_t>(doc)];
      for (int t = 0; t < doc_plant_count; ++t)
        mix_direction(docs[static_cast<std::size_t>(doc)],
                      (offset + t) % tokens_per_doc, direction);
      offset = (offset + doc_plant_count) % tokens_per_doc;

      data.qrels[qid][padded_id('d', doc, doc_width)] = 1;
    }
    data.queries.push_back(to_token_matrix(qid, query));
  }

  data.corpus.reserve(static_cast<std::size_t>(num_docs));
  for (int i = 0; i < num_docs; ++i)
    data.corpus.push_back(
        to_token_matrix(padded_id('d', i, doc_width), docs[static_cast<std::size_t>(i)]));
  return data;
}

}  // namespace lir
