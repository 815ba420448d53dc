#include "ssvd/worker.hpp"

#include <chrono>

#include "ssvd/errors.hpp"
#include "ssvd/p1.hpp"

namespace ssvd {
namespace {

constexpr int kPollMs = 100;

}  // namespace

ResultMessage handle_job(const JobMessage& job, std::uint64_t worker_id) {
  if (job.budget < 1) throw ContractError("job budget must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  PartialDecomposition part = decompose_chunk_incore(job.chunk, static_cast<std::size_t>(job.budget), job.decomposer);
  ResultMessage r;
  r.job_id = job.job_id;
  r.worker_id = worker_id;
  r.observations = part.observations_seen;
  r.U = std::move(part.U);
  r.S = std::move(part.S);
  r.compute_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

Worker::Worker(std::string_view listen_address, WorkerOptions options)
    : listener_(net::parse_endpoint(listen_address)), options_(options) {}

std::string Worker::address() const {
  return (listener_.host().empty() ? std::string("0.0.0.0") : listener_.host()) + ":" + std::to_string(port());
}

void Worker::serve() {
  while (!stop_.load()) {
    auto conn = listener_.accept(kPollMs);
    if (!conn) continue;
    try {
      if (serve_connection(*conn)) return;
    } catch (const IoError&) {
      // connection lost; back to accepting
    } catch (const ProtocolError&) {
      // unframeable input; the connection cannot be resynchronised
    }
  }
}

bool Worker::serve_connection(net::Socket& conn) {
  std::size_t answered = 0;
  while (!stop_.load()) {
    if (!conn.wait_readable(kPollMs)) continue;
    std::optional<std::vector<std::uint8_t>> payload;
    try {
      payload = net::recv_payload(conn);
    } catch (const ProtocolError& e) {
      net::send_message(conn, ErrorMessage{0, e.what()});
      throw;
    }
    if (!payload) return false;

    Message reply;
    try {
      Message msg = decode_payload(*payload);
      if (std::holds_alternative<ShutdownMessage>(msg)) return true;
      const auto* job = std::get_if<JobMessage>(&msg);
      if (!job) {
        reply = ErrorMessage{peek_job_id(*payload), "worker accepts only job and shutdown messages"};
      } else {
        if (options_.drop_after_jobs && answered >= *options_.drop_after_jobs) return false;
        try {
          reply = handle_job(*job, options_.worker_id);
        } catch (const Error& e) {
          reply = ErrorMessage{job->job_id, e.what()};
        }
      }
    } catch (const ProtocolError& e) {
      reply = ErrorMessage{peek_job_id(*payload), e.what()};
    }
    ++answered;
    ++jobs_served_;
    net::send_message(conn, reply);
  }
  return false;
}

void run_worker(std::string_view listen_address, WorkerOptions options) {
  Worker w(listen_address, options);
  w.serve();
}

}  // namespace ssvd
