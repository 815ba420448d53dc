#include "ssvd/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ssvd/corpus.hpp"
#include "ssvd/decomposition_io.hpp"
#include "ssvd/dispatcher.hpp"
#include "ssvd/errors.hpp"
#include "ssvd/experiments.hpp"
#include "ssvd/net.hpp"
#include "ssvd/p1.hpp"
#include "ssvd/p2.hpp"
#include "ssvd/shuffle.hpp"
#include "ssvd/stream.hpp"
#include "ssvd/synthetic.hpp"
#include "ssvd/topics.hpp"
#include "ssvd/worker.hpp"

namespace ssvd {
namespace {

struct DecomposeArgs {
  std::string algo = "p2";
  std::size_t k = 10;
  std::size_t oversample = 0;
  std::size_t power_iters = 0;
  std::optional<std::size_t> chunk_size;
  std::uint64_t seed = 0;
  bool reorthonormalize = false;
  std::string input;
  std::string output;
};

void add_decompose_options(CLI::App* cmd, DecomposeArgs& a, bool allow_p2) {
  auto* algo = cmd->add_option("--algo", a.algo, "Algorithm")->capture_default_str();
  if (allow_p2)
    algo->check(CLI::IsMember({"p1", "p2", "p12"}));
  else
    algo->check(CLI::IsMember({"p1", "p12"}));
  cmd->add_option("--k", a.k, "Number of retained factors")->capture_default_str();
  cmd->add_option("--oversample", a.oversample, "Oversampling l")->capture_default_str();
  cmd->add_option("--power-iters", a.power_iters, "Power iterations q (P2), inner power iterations (P12)")
      ->capture_default_str();
  cmd->add_option("--chunk-size", a.chunk_size, "Re-chunk the input into this many columns");
  cmd->add_option("--seed", a.seed, "Random seed")->capture_default_str();
  cmd->add_flag("--reorthonormalize", a.reorthonormalize, "Orthonormalize after each power pass (P2)");
  cmd->add_option("--input", a.input, "Chunk stream file")->required();
  cmd->add_option("--output", a.output, "Decomposition file; metadata goes to <output>.json")->required();
}

DecompConfig to_config(const DecomposeArgs& a) {
  DecompConfig c;
  c.k = a.k;
  c.l = a.oversample;
  c.q = a.power_iters;
  c.chunk_size = a.chunk_size;
  c.seed = a.seed;
  c.reorthonormalize = a.reorthonormalize;
  return c;
}

void save(const Decomposition& d, const std::string& output, std::ostream& out) {
  write_decomposition(d, output);
  write_metadata(d, output + ".json");
  out << d.algorithm << ": rank " << d.S.size() << ", " << d.passes << " pass" << (d.passes == 1 ? "" : "es") << ", "
      << d.observations << " observations, " << d.wall_ms << " ms\n";
  if (d.rank_deficient) out << "note: input rank below k; " << d.S.size() << " factors returned\n";
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Streamed truncated SVD of sparse matrices (P1 merge, P2 stochastic, P12 hybrid)", "ssvd"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Convert a text corpus or MatrixMarket file to a chunk stream");
  std::string in_corpus, in_mm, in_output, in_vocab, in_weighting = "count";
  IngestOptions in_opts;
  auto* corpus_opt = ingest->add_option("--input", in_corpus, "Text corpus, one document per line");
  ingest->add_option("--mm", in_mm, "MatrixMarket coordinate file")->excludes(corpus_opt);
  ingest->add_option("--output", in_output, "Chunk stream file")->required();
  ingest->add_option("--vocab", in_vocab, "Vocabulary output (text corpora)");
  ingest->add_option("--vocab-size", in_opts.vocab_size)->capture_default_str();
  ingest->add_option("--weighting", in_weighting)->check(CLI::IsMember({"count", "tfidf"}))->capture_default_str();
  ingest->add_flag("--normalize", in_opts.normalize, "Scale documents to unit length");
  ingest->add_option("--chunk-size", in_opts.chunk_size)->capture_default_str();

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic planted-spectrum stream");
  SyntheticSpec sy_spec;
  std::size_t sy_chunk = 200;
  std::string sy_output;
  synth->add_option("--rows", sy_spec.rows)->capture_default_str();
  synth->add_option("--cols", sy_spec.cols)->capture_default_str();
  synth->add_option("--rank", sy_spec.rank, "0 = full")->capture_default_str();
  synth->add_option("--alpha", sy_spec.alpha)->capture_default_str();
  synth->add_option("--scale", sy_spec.scale)->capture_default_str();
  synth->add_option("--density", sy_spec.factor_density)->capture_default_str();
  synth->add_option("--activation", sy_spec.activation)->capture_default_str();
  synth->add_flag("--drift", sy_spec.drift);
  synth->add_option("--seed", sy_spec.seed)->capture_default_str();
  synth->add_option("--chunk-size", sy_chunk)->capture_default_str();
  synth->add_option("--output", sy_output)->required();

  // decompose
  auto* decompose = app.add_subcommand("decompose", "Decompose a chunk stream");
  DecomposeArgs dec;
  add_decompose_options(decompose, dec, true);

  // shuffle
  auto* shuffle = app.add_subcommand("shuffle", "Permute the columns of a chunk stream");
  std::string sh_input, sh_output;
  std::uint64_t sh_seed = 0;
  ShuffleOptions sh_opts;
  shuffle->add_option("--input", sh_input)->required();
  shuffle->add_option("--output", sh_output)->required();
  shuffle->add_option("--seed", sh_seed)->capture_default_str();
  shuffle->add_option("--chunk-size", sh_opts.chunk_size, "0 = widest input chunk")->capture_default_str();
  shuffle->add_option("--bucket-columns", sh_opts.bucket_columns)->capture_default_str();

  // worker
  auto* worker = app.add_subcommand("worker", "Serve chunk jobs for a dispatcher");
  std::string wk_listen;
  WorkerOptions wk_opts;
  worker->add_option("--listen", wk_listen, std::string("host:port; defaults to $") + kWorkerListenEnv);
  worker->add_option("--id", wk_opts.worker_id)->capture_default_str();

  // dispatch
  auto* dispatch = app.add_subcommand("dispatch", "Run P1/P12 across workers");
  DecomposeArgs dis;
  dis.algo = "p1";
  std::string dis_workers;
  ClusterConfig cluster;
  bool unordered = false;
  add_decompose_options(dispatch, dis, false);
  dispatch->add_option("--workers", dis_workers, "Comma-separated host:port list")->required();
  dispatch->add_option("--max-in-flight", cluster.max_in_flight)->capture_default_str();
  dispatch->add_flag("--unordered-merge", unordered, "Merge results as they arrive");
  dispatch->add_flag("--shutdown-workers", cluster.shutdown_workers, "Stop the workers when done");

  // eval
  auto* eval = app.add_subcommand("eval", "Run an experiment scenario against the oracle");
  std::string ev_scenario, ev_output, ev_input;
  ExperimentParams ev;
  bool ev_no_timing = false;
  eval->add_option("scenario", ev_scenario, "oversampling | chunk_size | shuffle | cluster")->required();
  eval->add_option("--output", ev_output, "CSV report; summary goes to <output>.json")->required();
  eval->add_option("--input", ev_input, "Chunk stream file instead of the synthetic dataset");
  eval->add_option("--k", ev.k)->capture_default_str();
  eval->add_option("--oversample", ev.oversample, "l for single-l scenarios (default k)");
  eval->add_option("--seed", ev.seed)->capture_default_str();
  eval->add_option("--chunk-size", ev.chunk_size)->capture_default_str();
  eval->add_option("--nodes", ev.nodes, "Node counts for the cluster scenario")->delimiter(',');
  eval->add_option("--rows", ev.data.rows)->capture_default_str();
  eval->add_option("--cols", ev.data.cols)->capture_default_str();
  eval->add_option("--alpha", ev.data.alpha)->capture_default_str();
  eval->add_option("--data-seed", ev.data.seed)->capture_default_str();
  eval->add_flag("--no-timing", ev_no_timing, "Write wall_ms as 0 for byte-stable reports");

  // topics
  auto* topics = app.add_subcommand("topics", "Print the most salient features of each factor");
  std::string tp_input, tp_vocab;
  std::size_t tp_topics = 10, tp_words = 10;
  topics->add_option("--input", tp_input, "Decomposition file")->required();
  topics->add_option("--vocab", tp_vocab, "Vocabulary file")->required();
  topics->add_option("--topics", tp_topics)->capture_default_str();
  topics->add_option("--words", tp_words)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*ingest) {
      if (!in_mm.empty()) {
        convert_matrix_market(in_mm, in_output, in_opts.chunk_size);
        out << "converted " << in_mm << " -> " << in_output << "\n";
      } else {
        if (in_corpus.empty()) throw ConfigError("ingest: one of --input or --mm is required");
        if (in_vocab.empty()) throw ConfigError("ingest: --vocab is required for text corpora");
        in_opts.weighting = in_weighting == "tfidf" ? Weighting::tfidf : Weighting::count;
        const IngestResult r = ingest_corpus(read_corpus(in_corpus), in_opts, in_output, in_vocab);
        out << r.documents << " documents, " << r.vocabulary.size() << " features, " << r.empty_documents
            << " empty documents\n";
      }
    } else if (*synth) {
      SyntheticStream s(sy_spec, sy_chunk);
      write_stream(s, sy_output);
      out << "wrote " << sy_spec.rows << " x " << sy_spec.cols << " synthetic stream to " << sy_output << "\n";
    } else if (*decompose) {
      auto stream = open_stream(dec.input);
      const DecompConfig cfg = to_config(dec);
      Decomposition d;
      if (dec.algo == "p1")
        d = decompose_p1(*stream, cfg);
      else if (dec.algo == "p12")
        d = decompose_p12(*stream, cfg);
      else
        d = decompose_p2(*stream, cfg);
      save(d, dec.output, out);
    } else if (*shuffle) {
      shuffle_stream(sh_input, sh_output, sh_seed, sh_opts);
      out << "shuffled " << sh_input << " -> " << sh_output << "\n";
    } else if (*worker) {
      if (wk_listen.empty()) {
        const char* env = std::getenv(kWorkerListenEnv);
        if (!env || !*env) throw ConfigError(std::string("worker: --listen or $") + kWorkerListenEnv + " is required");
        wk_listen = env;
      }
      Worker w(wk_listen, wk_opts);
      out << "worker " << wk_opts.worker_id << " listening on " << w.address() << std::endl;
      w.serve();
    } else if (*dispatch) {
      for (const auto& ep : net::parse_endpoints(dis_workers)) cluster.workers.push_back(ep.str());
      cluster.deterministic_merge = !unordered;
      auto stream = open_stream(dis.input);
      const DecompConfig cfg = to_config(dis);
      const InCoreDecomposer decomposer =
          dis.algo == "p12" ? InCoreDecomposer::stochastic(cfg.q, cfg.seed) : InCoreDecomposer::exact();
      DispatchStats stats;
      const Decomposition d = run_dispatcher(*stream, cfg, decomposer, cluster, &stats);
      save(d, dis.output, out);
      out << stats.jobs << " jobs, " << stats.redispatched << " re-dispatched, " << stats.failed_workers
          << " failed workers\n";
    } else if (*eval) {
      const Scenario scenario = parse_scenario(ev_scenario);
      if (!ev_input.empty()) ev.input = ev_input;
      ev.record_timing = !ev_no_timing;
      const ExperimentResult r = run_experiment(scenario, ev);
      write_experiment(r, ev, ev_output);
      out << r.configs.size() << " configurations, " << r.rows.size() << " rows -> " << ev_output << "\n";
      for (const auto& [name, value] : r.comparisons) out << name << ": " << value << "\n";
    } else if (*topics) {
      const Decomposition d = read_decomposition(tp_input);
      const auto vocab = read_vocabulary(tp_vocab);
      for (const auto& t : show_topics(d, vocab, tp_topics, tp_words))
        out << "topic #" << t.index << " (" << t.singular_value << "): " << t.format() << "\n";
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace ssvd
