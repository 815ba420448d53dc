#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "ssvd/net.hpp"
#include "ssvd/protocol.hpp"

namespace ssvd {

/// Environment variable consulted when no listen address flag is given.
inline constexpr const char* kWorkerListenEnv = "SSVD_WORKER_LISTEN";

struct WorkerOptions {
  std::uint64_t worker_id = 0;
  /// Test hook: close each connection without replying once this many jobs
  /// have been answered on it, simulating a crash mid-job.
  std::optional<std::size_t> drop_after_jobs;
};

/// Computes the reply for one job.
ResultMessage handle_job(const JobMessage& job, std::uint64_t worker_id);

/// Serves one connection at a time, jobs sequentially. Stateless between jobs.
class Worker {
 public:
  explicit Worker(std::string_view listen_address, WorkerOptions options = {});

  std::uint16_t port() const noexcept { return listener_.port(); }
  std::string address() const;
  std::size_t jobs_served() const noexcept { return jobs_served_.load(); }

  /// Blocks until a shutdown message arrives or stop() is called. A lost
  /// connection returns the worker to accepting.
  void serve();
  /// Thread-safe; serve() returns within roughly 100 ms.
  void stop() noexcept { stop_.store(true); }

 private:
  /// True if a shutdown message was received.
  bool serve_connection(net::Socket& conn);

  net::Listener listener_;
  WorkerOptions options_;
  std::atomic<bool> stop_{false};
  std::atomic<std::size_t> jobs_served_{0};
};

/// Serves on `listen_address` until shutdown.
void run_worker(std::string_view listen_address, WorkerOptions options = {});

}  // namespace ssvd
