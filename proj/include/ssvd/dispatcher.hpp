#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ssvd/decomposition.hpp"
#include "ssvd/p1.hpp"
#include "ssvd/stream.hpp"

namespace ssvd {

struct ClusterConfig {
  std::vector<std::string> workers;  // host:port
  /// Merge strictly in chunk-index order, buffering early results. When
  /// false, results are merged as they arrive and the output may differ
  /// from the sequential fold beyond round-off.
  bool deterministic_merge = true;
  std::size_t max_in_flight = 1;  // per worker
  /// Send a shutdown message to every live worker when done.
  bool shutdown_workers = false;

  /// Throws ConfigError unless there is at least one worker and
  /// max_in_flight >= 1.
  void validate() const;
};

struct DispatchStats {
  std::size_t jobs = 0;
  std::size_t redispatched = 0;
  std::size_t failed_workers = 0;
  /// Largest number of completed results held unmerged at once.
  std::size_t max_buffered = 0;
  /// Results returned by each worker.
  std::vector<std::size_t> jobs_per_worker;
};

/// Distributed P1/P12: reads the stream once, ships every chunk to a worker
/// and merges the returned partial decompositions. Chunk i is decomposed with
/// decomposer.for_chunk(i), so with deterministic_merge the result equals
/// decompose_p1(stream, cfg, decomposer) up to round-off.
///
/// A job whose worker fails is re-sent to another live worker; a result is
/// consumed at most once per job id. Throws Error with a progress summary if
/// every worker fails, and Error if a worker rejects a job.
Decomposition run_dispatcher(ChunkStream& stream, const DecompConfig& cfg, const InCoreDecomposer& decomposer,
                             const ClusterConfig& cluster, DispatchStats* stats = nullptr);

}  // namespace ssvd
