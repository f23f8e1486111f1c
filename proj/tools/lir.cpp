// lir: late-interaction retrieval engine CLI.
//
// Subcommands: synth, index, search, evaluate, bench. Exit codes: 0 success,
// 1 I/O or data-format error, 2 configuration error, 3 evaluation mismatch.
// All randomized behavior is governed by the explicit --seed flag.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "lir/bench.hpp"
#include "lir/eval.hpp"
#include "lir/fde.hpp"
#include "lir/index.hpp"
#include "lir/io.hpp"
#include "lir/retrieval.hpp"
#include "lir/scoring.hpp"

namespace {

struct IndexArgs {
  std::string corpus, out, mode = "flat";
  int d = 128, k_sim = 3, reps = 1, sketch_dim = 0, centroids = 0;
  std::string projection = "identity";
  std::uint64_t seed = 0;
};

struct SearchArgs {
  std::string index, corpus, queries, mode = "exact", run_out, tag = "lir";
  int top_k = 1000, rerank_k = 100, candidates = 0;
  std::uint64_t seed = 0;
};

struct EvaluateArgs {
  std::string run, qrels, report_out;
  std::vector<int> cutoffs = lir::default_cutoffs();
};

struct BenchArgs {
  std::string corpus, queries, qrels, sweep, csv_out;
  int warmup = 10, top_k = 100, rerank_k = 100, candidates = 0, d = 128, reps = 1;
  std::string projection = "identity";
  int sketch_dim = 0;
  std::uint64_t seed = 0;
};

struct SynthArgs {
  int docs = 1000, tokens = 16, queries = 50, d = 128, relevant = 5;
  std::uint64_t seed = 42;
  std::string out_prefix;
};

lir::Projection parse_projection(const std::string& name) {
  if (name == "identity") return lir::Projection::Identity;
  if (name == "sketch") return lir::Projection::SparseSketch;
  throw lir::ConfigError("unknown projection '" + name + "' (identity|sketch)");
}

void print_latency_summary(const std::vector<lir::QueryTiming>& timings) {
  std::vector<double> totals;
  totals.reserve(timings.size());
  double sum = 0.0;
  for (const auto& t : timings) {
    totals.push_back(t.total_ms);
    sum += t.total_ms;
  }
  std::sort(totals.begin(), totals.end());
  const auto at = [&](double q) {
    const auto n = totals.size();
    const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
    return totals[std::min(n - 1, std::max<std::size_t>(rank, 1) - 1)];
  };
  std::printf("queries=%zu lat_mean_ms=%.4f lat_p50_ms=%.4f lat_p95_ms=%.4f\n",
              totals.size(), sum / static_cast<double>(totals.size()), at(0.50),
              at(0.95));
}

int cmd_index(const IndexArgs& args) {
  const auto corpus = lir::load_embeddings(args.corpus);
  if (args.mode == "flat") {
    lir::EncodingConfig config;
    config.d = args.d;
    config.k_sim = args.k_sim;
    config.repetitions = args.reps;
    config.projection = parse_projection(args.projection);
    config.sketch_dim = args.sketch_dim;
    config.seed = args.seed;
    const lir::FlatFdeIndex index = lir::build_flat_index(corpus, config);
    lir::save_index(index, args.out);
    std::printf("mode=flat docs=%lld fde_dim=%lld index_ms=%.3f\n",
                static_cast<long long>(index.num_docs()),
                static_cast<long long>(lir::fde_dim(config)), index.build_ms);
  } else if (args.mode == "plaid") {
    const lir::PlaidLiteIndex index =
        lir::build_plaid_lite(corpus, args.centroids, args.seed);
    lir::save_index(index, args.out);
    std::printf("mode=plaid docs=%zu tokens=%lld centroids=%d index_ms=%.3f\n",
                index.docs.size(), static_cast<long long>(index.total_tokens()),
                index.num_centroids(), index.build_ms);
  } else {
    throw lir::ConfigError("unknown index mode '" + args.mode + "' (flat|plaid)");
  }
  return 0;
}

int cmd_search(const SearchArgs& args) {
  const auto queries = lir::load_embeddings(args.queries);

  lir::PipelineConfig config;
  config.top_k = args.top_k;
  config.rerank_depth = args.rerank_k;
  config.n_candidates = args.candidates;

  std::vector<lir::TokenMatrix> corpus;
  lir::FlatFdeIndex flat;
  lir::PlaidLiteIndex plaid;
  lir::RetrievalInput input;

  const auto load_flat = [&] {
    if (args.index.empty())
      throw lir::ConfigError(args.mode + " mode requires --index (flat)");
    flat = lir::load_flat_index(args.index);
    input.flat = &flat;
    config.encoding = flat.config;
  };
  const auto load_corpus = [&] {
    if (args.corpus.empty())
      throw lir::ConfigError(args.mode + " mode requires --corpus");
    corpus = lir::load_embeddings(args.corpus);
    input.corpus = &corpus;
  };

  if (args.mode == "exact") {
    config.mode = lir::PipelineMode::ExactFull;
    if (!args.corpus.empty()) {
      load_corpus();
    } else if (!args.index.empty()) {
      plaid = lir::load_plaid_index(args.index);
      input.plaid = &plaid;
    } else {
      throw lir::ConfigError("exact mode requires --corpus or a PLAID-lite --index");
    }
  } else if (args.mode == "plaid") {
    config.mode = lir::PipelineMode::PlaidLite;
    if (args.index.empty()) throw lir::ConfigError("plaid mode requires --index");
    plaid = lir::load_plaid_index(args.index);
    input.plaid = &plaid;
  } else if (args.mode == "muvera") {
    config.mode = lir::PipelineMode::Muvera;
    load_flat();
  } else if (args.mode == "muvera-rerank") {
    config.mode = lir::PipelineMode::MuveraRerank;
    if (args.rerank_k < args.top_k)
      throw lir::ConfigError("rerank depth below top-k (--rerank-k " +
                             std::to_string(args.rerank_k) + " < --top-k " +
                             std::to_string(args.top_k) + ")");
    load_flat();
    load_corpus();
  } else {
    throw lir::ConfigError("unknown search mode '" + args.mode +
                           "' (exact|plaid|muvera|muvera-rerank)");
  }

  const auto [run, timings] = lir::retrieve(queries, input, config);
  lir::write_run(run, args.tag, args.run_out);
  print_latency_summary(timings);
  return 0;
}

int cmd_evaluate(const EvaluateArgs& args) {
  const lir::RunResult run = lir::load_run(args.run);
  const lir::Qrels qrels = lir::load_qrels(args.qrels);
  const lir::MetricReport report = lir::evaluate_run(run, qrels, args.cutoffs);
  std::cout << lir::format_metric_table(report);
  if (!args.report_out.empty()) lir::write_metric_report(report, args.report_out);
  return 0;
}

int cmd_bench(const BenchArgs& args) {
  const auto corpus = lir::load_embeddings(args.corpus);
  const auto queries = lir::load_embeddings(args.queries);
  const lir::Qrels qrels = lir::load_qrels(args.qrels);

  lir::PipelineConfig defaults;
  defaults.top_k = args.top_k;
  defaults.rerank_depth = args.rerank_k;
  defaults.n_candidates = args.candidates;
  defaults.encoding.d = args.d;
  defaults.encoding.repetitions = args.reps;
  defaults.encoding.projection = parse_projection(args.projection);
  defaults.encoding.sketch_dim = args.sketch_dim;
  defaults.encoding.seed = args.seed;

  const auto sweep = lir::parse_sweep(args.sweep, defaults);
  const lir::BenchReport report =
      lir::run_bench(corpus, queries, qrels, sweep, args.warmup, args.seed);
  lir::emit_tradeoff_csv(report, args.csv_out);
  for (std::size_t i = 0; i < report.rows.size(); ++i)
    lir::write_metric_report(report.rows[i].quality,
                             args.csv_out + ".row" + std::to_string(i) + "." +
                                 report.rows[i].mode + ".txt");
  std::cout << lir::format_bench_table(report);
  return 0;
}

int cmd_synth(const SynthArgs& args) {
  const lir::SyntheticData data = lir::gen_synthetic_corpus(
      args.docs, args.tokens, args.queries, args.d, args.relevant, args.seed);
  lir::write_embeddings(data.corpus, args.out_prefix + ".corpus.bin");
  lir::write_embeddings(data.queries, args.out_prefix + ".queries.bin");
  lir::write_qrels(data.qrels, args.out_prefix + ".qrels.txt");
  std::printf("docs=%d queries=%d judged=%d files=%s.{corpus.bin,queries.bin,qrels.txt}\n",
              args.docs, args.queries, args.queries * args.relevant,
              args.out_prefix.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"late-interaction retrieval engine"};
  app.require_subcommand(1);

  IndexArgs index_args;
  auto* index = app.add_subcommand("index", "build and persist a retrieval index");
  index->add_option("--corpus", index_args.corpus, "embeddings file")->required();
  index->add_option("--out", index_args.out, "index output path")->required();
  index->add_option("--mode", index_args.mode, "flat|plaid");
  index->add_option("--d", index_args.d, "token dimension");
  index->add_option("--k-sim", index_args.k_sim, "SimHash bits");
  index->add_option("--reps", index_args.reps, "encoding repetitions");
  index->add_option("--projection", index_args.projection, "identity|sketch");
  index->add_option("--sketch-dim", index_args.sketch_dim, "sketch width (0 = d/4)");
  index->add_option("--centroids", index_args.centroids,
                    "plaid centroid count (0 = 4*sqrt(tokens))");
  index->add_option("--seed", index_args.seed, "random seed");

  SearchArgs search_args;
  auto* search = app.add_subcommand("search", "run a retrieval pipeline");
  search->add_option("--index", search_args.index, "index file");
  search->add_option("--corpus", search_args.corpus,
                     "embeddings file (exact and muvera-rerank modes)");
  search->add_option("--queries", search_args.queries, "query embeddings")->required();
  search->add_option("--mode", search_args.mode, "exact|plaid|muvera|muvera-rerank");
  search->add_option("--top-k", search_args.top_k, "results per query");
  search->add_option("--rerank-k", search_args.rerank_k, "rerank depth K");
  search->add_option("--candidates", search_args.candidates,
                     "plaid candidate depth (0 = max(top-k, 1000))");
  search->add_option("--run-out", search_args.run_out, "TREC run output")->required();
  search->add_option("--tag", search_args.tag, "run tag");
  search->add_option("--seed", search_args.seed, "random seed");

  EvaluateArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "score a run against qrels");
  evaluate->add_option("--run", eval_args.run, "TREC run file")->required();
  evaluate->add_option("--qrels", eval_args.qrels, "TREC qrels file")->required();
  evaluate->add_option("--cutoffs", eval_args.cutoffs, "metric cutoffs")
      ->delimiter(',');
  evaluate->add_option("--report-out", eval_args.report_out, "key-value report path");

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "latency/quality sweep");
  bench->add_option("--corpus", bench_args.corpus, "embeddings file")->required();
  bench->add_option("--queries", bench_args.queries, "query embeddings")->required();
  bench->add_option("--qrels", bench_args.qrels, "TREC qrels file")->required();
  bench->add_option("--sweep", bench_args.sweep,
                    "semicolon-separated mode[:k_sim] entries")->required();
  bench->add_option("--warmup", bench_args.warmup, "untimed warmup queries");
  bench->add_option("--csv-out", bench_args.csv_out, "trade-off CSV path")->required();
  bench->add_option("--top-k", bench_args.top_k, "results per query");
  bench->add_option("--rerank-k", bench_args.rerank_k, "rerank depth K");
  bench->add_option("--candidates", bench_args.candidates, "plaid candidate depth");
  bench->add_option("--d", bench_args.d, "token dimension");
  bench->add_option("--reps", bench_args.reps, "encoding repetitions");
  bench->add_option("--projection", bench_args.projection, "identity|sketch");
  bench->add_option("--sketch-dim", bench_args.sketch_dim, "sketch width (0 = d/4)");
  bench->add_option("--seed", bench_args.seed, "random seed");

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "generate a synthetic retrieval task");
  synth->add_option("--docs", synth_args.docs, "document count");
  synth->add_option("--tokens", synth_args.tokens, "tokens per document");
  synth->add_option("--queries", synth_args.queries, "query count");
  synth->add_option("--d", synth_args.d, "token dimension");
  synth->add_option("--relevant", synth_args.relevant, "relevant docs per query");
  synth->add_option("--seed", synth_args.seed, "random seed");
  synth->add_option("--out-prefix", synth_args.out_prefix, "output path prefix")
      ->required();

  try {
    app.parse(argc, argv);
    if (index->parsed()) return cmd_index(index_args);
    if (search->parsed()) return cmd_search(search_args);
    if (evaluate->parsed()) return cmd_evaluate(eval_args);
    if (bench->parsed()) return cmd_bench(bench_args);
    if (synth->parsed()) return cmd_synth(synth_args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const lir::EvalMismatchError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const lir::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const lir::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
