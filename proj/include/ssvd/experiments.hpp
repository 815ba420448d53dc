#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ssvd/dense.hpp"
#include "ssvd/report.hpp"
#include "ssvd/synthetic.hpp"

namespace ssvd {

enum class Scenario { oversampling, chunk_size, shuffle, cluster };

/// Throws ConfigError naming the valid scenarios.
Scenario parse_scenario(std::string_view name);
const char* scenario_name(Scenario s) noexcept;

struct ExperimentParams {
  /// Dataset used when `input` is empty.
  SyntheticSpec data;
  /// Chunk stream file to use instead of the synthetic dataset.
  std::optional<std::filesystem::path> input;
  std::size_t k = 10;
  /// Oversampling for scenarios that run a single l; defaults to k.
  std::optional<std::size_t> oversample;
  std::uint64_t seed = 0;
  std::size_t chunk_size = 200;
  std::vector<std::size_t> nodes{1, 2, 4};
  /// When false every wall_ms is written as 0 so reports are byte-stable.
  bool record_timing = true;
  /// Scratch space for the shuffle scenario; the system temp dir if empty.
  std::filesystem::path work_dir;
};

/// Aggregate numbers for one configuration of a scenario.
struct ConfigSummary {
  std::string algo;
  std::size_t k = 0, l = 0, q = 0, chunk_size = 0, nodes = 1;
  double max_rel_err = 0.0;
  double mean_rel_err = 0.0;
  std::size_t overestimates = 0;
  /// Smallest principal-angle cosine between the estimated and oracle U.
  double min_subspace_cos = 0.0;
  double wall_ms = 0.0;
  std::size_t passes = 0;
  Spectrum spectrum;
};

struct ExperimentResult {
  Scenario scenario = Scenario::oversampling;
  std::vector<CsvRow> rows;
  std::vector<ConfigSummary> configs;
  Spectrum oracle;
  std::size_t rows_m = 0, cols_n = 0;
  /// Scenario-specific comparisons, e.g. ordered vs shuffled spectrum
  /// max abs difference per algorithm.
  std::vector<std::pair<std::string, double>> comparisons;
};

/// Runs the algorithm grid of one scenario against the brute-force oracle.
///
/// oversampling: P2 over l in {0, k/2, k} x q in {0, 1, 3}, P1 over the same l,
///   P12 over the same grid as P2.
/// chunk_size:   P1, P12 and P2 at chunk sizes n, n/2, n/4.
/// shuffle:      ordered (drifting synthetic) vs offline-shuffled stream for P1,
///   P12 and P2; P2 uses per-column randomness keyed by original column index.
/// cluster:      P1 and P12 through the dispatcher with in-process localhost
///   workers for each node count.
ExperimentResult run_experiment(Scenario scenario, const ExperimentParams& params);

/// Writes the CSV report and a JSON sidecar (`<csv>.json`) with per-config
/// summaries. Throws IoError.
void write_experiment(const ExperimentResult& result, const ExperimentParams& params,
                      const std::filesystem::path& csv_path);

}  // namespace ssvd
