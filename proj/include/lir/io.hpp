#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lir/types.hpp"

namespace lir {

// Embedding container, little-endian throughout:
//   magic "TCTE" | u16 version=1 | u32 d | u64 record_count
//   per record: u16 id_len | id bytes (UTF-8) | u32 n | n*d f32
// Files with a .jsonl extension are instead parsed as one object per line
// with keys "id" and "vectors".
inline constexpr char kEmbeddingMagic[4] = {'T', 'C', 'T', 'E'};
inline constexpr std::uint16_t kEmbeddingVersion = 1;

/// Loads token matrices in file order, L2-normalizing rows at the boundary
/// and validating every invariant. Rejects malformed input outright.
std::vector<TokenMatrix> load_embeddings(const std::string& path);

/// Writes matrices so load_embeddings returns equal content. All matrices
/// must share one d. Values are written as given; normalization is a load-time
/// concern.
void write_embeddings(const std::vector<TokenMatrix>& ms, const std::string& path);

/// TREC 4-column qrels: "qid iter docid grade". The iter field is ignored.
Qrels load_qrels(const std::string& path);
void write_qrels(const Qrels& qrels, const std::string& path);

/// TREC 6-column run lines "qid Q0 docid rank score tag", rank from 1, score
/// with 6 decimal digits.
void write_run(const RunResult& run, const std::string& tag, const std::string& path);
RunResult load_run(const std::string& path);

struct SyntheticData {
  std::vector<TokenMatrix> corpus;
  std::vector<TokenMatrix> queries;
  Qrels qrels;
};

/// Deterministic synthetic retrieval task: every query shares a planted
/// direction with each of its relevant documents, mixed into a fraction of
/// their tokens, so exact MaxSim ranks the relevant documents on top. Queries
/// get tokens_per_doc tokens, like documents.
SyntheticData gen_synthetic_corpus(int num_docs, int tokens_per_doc, int num_queries,
                                   int d, int relevant_per_query, std::uint64_t seed);

}  // namespace lir
