#pragma once

#include <vector>

#include "lir/types.hpp"

namespace lir {

/// Exact late-interaction score: sum over query tokens of the maximum dot
/// product against the document's tokens, accumulated left-to-right in
/// 64-bit floats. This is the ground-truth oracle for every other pipeline.
double maxsim(const TokenMatrix& q, const TokenMatrix& dv);

/// Inner product of a query FDE and a document FDE in 64-bit accumulation.
double fde_score(const FdeVector& qf, const FdeVector& df);

/// Exact MaxSim of one query against a whole corpus; top_k entries ordered by
/// (score desc, doc id asc).
std::vector<RunEntry> maxsim_batch(const TokenMatrix& q,
                                   const std::vector<TokenMatrix>& docs, int top_k);

}  // namespace lir
