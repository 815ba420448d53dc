#include "ssvd/experiments.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <memory>
#include <numeric>
#include <thread>

#include "json.hpp"

#include "ssvd/dispatcher.hpp"
#include "ssvd/errors.hpp"
#include "ssvd/oracle.hpp"
#include "ssvd/p1.hpp"
#include "ssvd/p2.hpp"
#include "ssvd/shuffle.hpp"
#include "ssvd/stream.hpp"
#include "ssvd/worker.hpp"

namespace ssvd {
namespace {

std::unique_ptr<ChunkStream> open_source(const ExperimentParams& p, bool drift) {
  if (p.input) return open_stream(*p.input);
  SyntheticSpec spec = p.data;
  spec.drift = spec.drift || drift;
  return std::make_unique<SyntheticStream>(spec, p.chunk_size);
}

double max_abs_diff(const Spectrum& a, const Spectrum& b) {
  const std::size_t n = std::max(a.size(), b.size());
  const auto pa = a.padded(n);
  const auto pb = b.padded(n);
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) d = std::max(d, std::abs(pa[i] - pb[i]));
  return d;
}

class Recorder {
 public:
  Recorder(ExperimentResult& result, const Decomposition& oracle, const ExperimentParams& params)
      : result_(result), oracle_(oracle), params_(params) {}

  void record(const Decomposition& d, const std::string& algo, std::size_t chunk_size, std::size_t nodes) {
    SpectrumReport r = compare_decomposition(d, oracle_.S);
    r.algorithm = algo;
    if (!params_.record_timing) r.wall_ms = 0.0;
    auto rows = csv_rows(r, chunk_size, nodes);
    result_.rows.insert(result_.rows.end(), rows.begin(), rows.end());

    ConfigSummary s;
    s.algo = algo;
    s.k = d.config.k;
    s.l = d.config.l;
    s.q = d.config.q;
    s.chunk_size = chunk_size;
    s.nodes = nodes;
    s.max_rel_err = r.max_rel_err;
    s.mean_rel_err = r.mean_rel_err;
    s.overestimates = count_overestimates(d.S, Spectrum(oracle_.S.padded(std::max(oracle_.S.size(), d.S.size()))));
    if (d.U.cols() > 0) {
      const auto cos = principal_cosines(d.U, oracle_.U.leading_cols(std::min(d.U.cols(), oracle_.U.cols())));
      s.min_subspace_cos = cos.empty() ? 0.0 : *std::min_element(cos.begin(), cos.end());
    }
    s.wall_ms = r.wall_ms;
    s.passes = d.passes;
    s.spectrum = d.S;
    result_.configs.push_back(std::move(s));
  }

 private:
  ExperimentResult& result_;
  const Decomposition& oracle_;
  const ExperimentParams& params_;
};

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::filesystem::path& base) {
    static std::atomic<unsigned> counter{0};
    const auto root = base.empty() ? std::filesystem::temp_directory_path() : base;
    path = root / ("ssvd_shuffle_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

/// In-process localhost workers for one cluster run.
class LocalCluster {
 public:
  explicit LocalCluster(std::size_t nodes) {
    for (std::size_t i = 0; i < nodes; ++i) {
      workers_.push_back(std::make_unique<Worker>("127.0.0.1:0", WorkerOptions{i, std::nullopt}));
      config_.workers.push_back("127.0.0.1:" + std::to_string(workers_.back()->port()));
    }
    for (auto& w : workers_) threads_.emplace_back([&w] { w->serve(); });
  }
  ~LocalCluster() {
    for (auto& w : workers_) w->stop();
    for (auto& t : threads_) t.join();
  }
  const ClusterConfig& config() const noexcept { return config_; }

 private:
  std::vector<std::unique_ptr<Worker>> workers_;
  std::vector<std::thread> threads_;
  ClusterConfig config_;
};

struct Grid {
  std::size_t k, m;
  std::size_t clamp_l(std::size_t l) const { return std::min(l, m - k); }
};

DecompConfig make_config(std::size_t k, std::size_t l, std::size_t q, std::size_t chunk, std::uint64_t seed) {
  DecompConfig c;
  c.k = k;
  c.l = l;
  c.q = q;
  c.chunk_size = chunk;
  c.seed = seed;
  return c;
}

}  // namespace

Scenario parse_scenario(std::string_view name) {
  if (name == "oversampling") return Scenario::oversampling;
  if (name == "chunk_size" || name == "chunk-size") return Scenario::chunk_size;
  if (name == "shuffle") return Scenario::shuffle;
  if (name == "cluster") return Scenario::cluster;
  throw ConfigError("unknown scenario '" + std::string(name) + "' (expected oversampling, chunk_size, shuffle or cluster)");
}

const char* scenario_name(Scenario s) noexcept {
  switch (s) {
    case Scenario::oversampling: return "oversampling";
    case Scenario::chunk_size: return "chunk_size";
    case Scenario::shuffle: return "shuffle";
    case Scenario::cluster: return "cluster";
  }
  return "?";
}

ExperimentResult run_experiment(Scenario scenario, const ExperimentParams& params) {
  if (params.chunk_size < 1) throw ConfigError("experiment: chunk_size must be >= 1");
  const bool drift = scenario == Scenario::shuffle;
  auto source = open_source(params, drift);
  const std::size_t m = source->rows();
  if (params.k < 1 || params.k > m) throw ConfigError("experiment: k must be in [1, rows]");

  ExperimentResult result;
  result.scenario = scenario;
  result.rows_m = m;
  const Decomposition oracle = oracle_decompose(*source, params.k);
  result.oracle = oracle.S;
  result.cols_n = oracle.observations;
  const std::size_t n = result.cols_n;
  Recorder rec(result, oracle, params);

  const Grid grid{params.k, m};
  const std::size_t k = params.k;
  const std::size_t l_single = grid.clamp_l(params.oversample.value_or(k));
  const std::size_t chunk = params.chunk_size;
  const std::uint64_t seed = params.seed;

  switch (scenario) {
    case Scenario::oversampling: {
      const std::size_t ls[] = {0, k / 2, k};
      const std::size_t qs[] = {0, 1, 3};
      for (std::size_t l : ls)
        for (std::size_t q : qs)
          rec.record(decompose_p2(*source, make_config(k, grid.clamp_l(l), q, chunk, seed)), "p2", chunk, 1);
      for (std::size_t l : ls)
        rec.record(decompose_p1(*source, make_config(k, grid.clamp_l(l), 0, chunk, seed)), "p1", chunk, 1);
      for (std::size_t l : ls)
        for (std::size_t q : qs)
          rec.record(decompose_p12(*source, make_config(k, grid.clamp_l(l), q, chunk, seed)), "p12", chunk, 1);
      break;
    }
    case Scenario::chunk_size: {
      const std::size_t sizes[] = {n, std::max<std::size_t>(1, n / 2), std::max<std::size_t>(1, n / 4)};
      for (std::size_t c : sizes) {
        rec.record(decompose_p1(*source, make_config(k, l_single, 0, c, seed)), "p1", c, 1);
        rec.record(decompose_p12(*source, make_config(k, l_single, 1, c, seed)), "p12", c, 1);
        rec.record(decompose_p2(*source, make_config(k, l_single, 1, c, seed)), "p2", c, 1);
      }
      break;
    }
    case Scenario::shuffle: {
      TempDir tmp(params.work_dir);
      const auto ordered_path = tmp.path / "ordered.bin";
      const auto shuffled_path = tmp.path / "shuffled.bin";
      write_stream(*source, ordered_path);
      shuffle_stream(ordered_path, shuffled_path, seed, ShuffleOptions{chunk});
      FileChunkStream ordered(ordered_path);
      FileChunkStream shuffled(shuffled_path);

      // Shuffled position -> original column index.
      std::vector<std::uint64_t> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      std::vector<std::uint64_t> keys(n);
      for (std::size_t j = 0; j < n; ++j) keys[j] = shuffle_key(seed, j);
      std::sort(perm.begin(), perm.end(), [&](std::uint64_t a, std::uint64_t b) {
        return keys[a] != keys[b] ? keys[a] < keys[b] : a < b;
      });

      const DecompConfig p1_cfg = make_config(k, 0, 0, chunk, seed);
      const Decomposition p1_o = decompose_p1(ordered, p1_cfg);
      const Decomposition p1_s = decompose_p1(shuffled, p1_cfg);
      rec.record(p1_o, "p1/ordered", chunk, 1);
      rec.record(p1_s, "p1/shuffled", chunk, 1);

      const DecompConfig p12_cfg = make_config(k, 0, 1, chunk, seed);
      const Decomposition p12_o = decompose_p12(ordered, p12_cfg);
      const Decomposition p12_s = decompose_p12(shuffled, p12_cfg);
      rec.record(p12_o, "p12/ordered", chunk, 1);
      rec.record(p12_s, "p12/shuffled", chunk, 1);

      DecompConfig p2_cfg = make_config(k, l_single, 1, chunk, seed);
      p2_cfg.sampling = Sampling::per_column;
      const Decomposition p2_o = decompose_p2(ordered, p2_cfg);
      p2_cfg.column_key = [&perm](std::uint64_t s) { return perm[s]; };
      const Decomposition p2_s = decompose_p2(shuffled, p2_cfg);
      rec.record(p2_o, "p2/ordered", chunk, 1);
      rec.record(p2_s, "p2/shuffled", chunk, 1);

      result.comparisons.emplace_back("p1 ordered vs shuffled max_abs_diff", max_abs_diff(p1_o.S, p1_s.S));
      result.comparisons.emplace_back("p12 ordered vs shuffled max_abs_diff", max_abs_diff(p12_o.S, p12_s.S));
      result.comparisons.emplace_back("p2 ordered vs shuffled max_abs_diff", max_abs_diff(p2_o.S, p2_s.S));
      break;
    }
    case Scenario::cluster: {
      if (params.nodes.empty()) throw ConfigError("experiment: no node counts given");
      const DecompConfig cfg = make_config(k, l_single, 1, chunk, seed);
      const Decomposition local = decompose_p1(*source, cfg);
      for (std::size_t nodes : params.nodes) {
        if (nodes < 1) throw ConfigError("experiment: node counts must be >= 1");
        LocalCluster cluster(nodes);
        const Decomposition d1 = run_dispatcher(*source, cfg, InCoreDecomposer::exact(), cluster.config());
        rec.record(d1, "p1", chunk, nodes);
        const Decomposition d12 =
            run_dispatcher(*source, cfg, InCoreDecomposer::stochastic(cfg.q, cfg.seed), cluster.config());
        rec.record(d12, "p12", chunk, nodes);
        result.comparisons.emplace_back("p1 nodes=" + std::to_string(nodes) + " vs local max_abs_diff",
                                        max_abs_diff(d1.S, local.S));
      }
      break;
    }
  }
  return result;
}

void write_experiment(const ExperimentResult& result, const ExperimentParams& params,
                      const std::filesystem::path& csv_path) {
  {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw IoError("cannot write " + csv_path.string());
    write_csv(out, result.rows);
    if (!out) throw IoError("write failed: " + csv_path.string());
  }

  nlohmann::ordered_json j;
  j["scenario"] = scenario_name(result.scenario);
  j["rows"] = result.rows_m;
  j["cols"] = result.cols_n;
  j["k"] = params.k;
  j["seed"] = params.seed;
  j["chunk_size"] = params.chunk_size;
  if (params.input) {
    j["input"] = params.input->string();
  } else {
    const auto& d = params.data;
    j["synthetic"] = {{"rows", d.rows},           {"cols", d.cols},
                      {"rank", d.effective_rank()}, {"alpha", d.alpha},
                      {"scale", d.scale},         {"factor_density", d.factor_density},
                      {"activation", d.activation}, {"drift", d.drift || result.scenario == Scenario::shuffle},
                      {"seed", d.seed}};
  }
  j["oracle"] = result.oracle.values();
  auto& configs = j["configs"] = nlohmann::ordered_json::array();
  for (const auto& c : result.configs) {
    configs.push_back({{"algo", c.algo},
                       {"k", c.k},
                       {"l", c.l},
                       {"q", c.q},
                       {"chunk_size", c.chunk_size},
                       {"nodes", c.nodes},
                       {"max_rel_err", c.max_rel_err},
                       {"mean_rel_err", c.mean_rel_err},
                       {"overestimates", c.overestimates},
                       {"min_subspace_cos", c.min_subspace_cos},
                       {"wall_ms", c.wall_ms},
                       {"passes", c.passes}});
  }
  auto& cmp = j["comparisons"] = nlohmann::ordered_json::object();
  for (const auto& [name, value] : result.comparisons) cmp[name] = value;

  const auto json_path = std::filesystem::path(csv_path.string() + ".json");
  std::ofstream out(json_path, std::ios::binary);
  if (!out) throw IoError("cannot write " + json_path.string());
  out << j.dump(2) << '\n';
}

}  // namespace ssvd
