#include "ssvd/dispatcher.hpp"

#include <chrono>
#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <thread>

#include "ssvd/errors.hpp"
#include "ssvd/net.hpp"
#include "ssvd/protocol.hpp"

namespace ssvd {

void ClusterConfig::validate() const {
  if (workers.empty()) throw ConfigError("cluster: at least one worker address is required");
  if (max_in_flight < 1) throw ConfigError("cluster: max_in_flight must be >= 1");
  for (const auto& w : workers) net::parse_endpoint(w);
}

namespace {

struct Job {
  std::uint64_t id;
  SparseChunk chunk;
};

struct Slot {
  net::Endpoint endpoint;
  net::Socket sock;
  std::deque<Job> outbox;     // assigned, not yet sent
  std::size_t in_flight = 0;  // outbox plus sent-but-unanswered
  bool alive = true;
  std::size_t jobs_done = 0;
};

class Session {
 public:
  Session(const ClusterConfig& cluster, const InCoreDecomposer& decomposer, std::size_t rows, std::size_t budget)
      : cluster_(cluster), decomposer_(decomposer), rows_(rows), budget_(budget) {
    for (const auto& w : cluster.workers) {
      slots_.emplace_back();
      slots_.back().endpoint = net::parse_endpoint(w);
    }
  }

  ~Session() { stop(true); }

  Decomposition run(ChunkStream& source, const DecompConfig& cfg, DispatchStats* stats);

 private:
  void handler(std::size_t index);
  void fail_worker(std::size_t index, std::deque<Job>& sent);
  std::optional<std::size_t> pick_slot();
  void stop(bool abort);
  std::string progress(std::size_t merged, std::size_t observations) const;

  const ClusterConfig& cluster_;
  const InCoreDecomposer& decomposer_;
  const std::size_t rows_;
  const std::size_t budget_;

  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Slot> slots_;
  std::vector<std::thread> threads_;
  std::map<std::uint64_t, SparseChunk> retry_;
  std::map<std::uint64_t, PartialDecomposition> completed_;
  std::set<std::uint64_t> outstanding_;
  std::optional<std::string> fatal_;
  bool finished_ = false;
  std::size_t rr_ = 0;
  std::uint64_t next_id_ = 0;
  DispatchStats stats_;
};

std::optional<std::size_t> Session::pick_slot() {
  const std::size_t w = slots_.size();
  for (std::size_t i = 0; i < w; ++i) {
    const std::size_t s = (rr_ + i) % w;
    if (slots_[s].alive && slots_[s].in_flight < cluster_.max_in_flight) {
      rr_ = (s + 1) % w;
      return s;
    }
  }
  return std::nullopt;
}

void Session::fail_worker(std::size_t index, std::deque<Job>& sent) {
  Slot& slot = slots_[index];
  if (!slot.alive) return;
  slot.alive = false;
  ++stats_.failed_workers;
  for (auto* q : {&sent, &slot.outbox}) {
    for (auto& job : *q) {
      ++stats_.redispatched;
      retry_.emplace(job.id, std::move(job.chunk));
    }
    q->clear();
  }
  slot.in_flight = 0;
  slot.sock.shutdown();
  cv_.notify_all();
}

void Session::handler(std::size_t index) {
  std::deque<Job> sent;
  try {
    net::Socket sock = net::connect_to(slots_[index].endpoint);
    {
      std::lock_guard lk(mu_);
      slots_[index].sock = std::move(sock);
      if (finished_) return;
    }
    net::Socket& conn = slots_[index].sock;
    for (;;) {
      std::vector<Job> to_send;
      {
        std::unique_lock lk(mu_);
        Slot& slot = slots_[index];
        cv_.wait(lk, [&] { return !slot.outbox.empty() || !sent.empty() || finished_ || !slot.alive; });
        if (!slot.alive) return;
        if (slot.outbox.empty() && sent.empty()) break;  // finished
        while (!slot.outbox.empty()) {
          to_send.push_back(std::move(slot.outbox.front()));
          slot.outbox.pop_front();
        }
      }
      for (auto& job : to_send) {
        std::vector<std::uint8_t> frame;
        {
          JobMessage msg{job.id, budget_, decomposer_.for_chunk(job.id), std::move(job.chunk)};
          frame = encode_frame(msg);
          job.chunk = std::move(msg.chunk);
        }
        sent.push_back(std::move(job));
        conn.send_all(frame);
      }

      auto payload = net::recv_payload(conn);
      if (!payload) throw IoError("worker closed the connection");
      Message reply = decode_payload(*payload);

      std::lock_guard lk(mu_);
      if (auto* err = std::get_if<ErrorMessage>(&reply)) {
        fatal_ = "worker " + slots_[index].endpoint.str() + " rejected job " + std::to_string(err->job_id) + ": " +
                 err->diagnostic;
        cv_.notify_all();
        return;
      }
      auto* res = std::get_if<ResultMessage>(&reply);
      if (!res) throw ProtocolError("unexpected message type from worker");
      auto it = sent.begin();
      while (it != sent.end() && it->id != res->job_id) ++it;
      if (it == sent.end()) throw ProtocolError("result for unknown job " + std::to_string(res->job_id));
      if (res->U.rows() != rows_ || res->S.size() > budget_)
        throw ProtocolError("result dimensions do not match the job");
      sent.erase(it);
      Slot& slot = slots_[index];
      --slot.in_flight;
      ++slot.jobs_done;
      if (outstanding_.erase(res->job_id)) {
        completed_.emplace(res->job_id,
                           PartialDecomposition{std::move(res->U), std::move(res->S),
                                                static_cast<std::size_t>(res->observations)});
        stats_.max_buffered = std::max(stats_.max_buffered, completed_.size());
      }
      cv_.notify_all();
    }
    if (cluster_.shutdown_workers) net::send_message(conn, ShutdownMessage{});
  } catch (const Error&) {
    std::lock_guard lk(mu_);
    fail_worker(index, sent);
  }
}

void Session::stop(bool abort) {
  {
    std::lock_guard lk(mu_);
    finished_ = true;
    if (abort)
      for (auto& s : slots_) s.sock.shutdown();
    cv_.notify_all();
  }
  for (auto& t : threads_)
    if (t.joinable()) t.join();
  threads_.clear();
}

std::string Session::progress(std::size_t merged, std::size_t observations) const {
  return "merged " + std::to_string(merged) + " of " + std::to_string(next_id_) + " chunks read (" +
         std::to_string(observations) + " observations)";
}

Decomposition Session::run(ChunkStream& source, const DecompConfig& cfg, DispatchStats* stats) {
  PassCounter counter(source);
  counter.rewind();
  stats_.jobs_per_worker.assign(slots_.size(), 0);
  for (std::size_t i = 0; i < slots_.size(); ++i) threads_.emplace_back(&Session::handler, this, i);

  const std::size_t window = slots_.size() * cluster_.max_in_flight;
  PartialDecomposition acc = PartialDecomposition::empty(rows_);
  std::size_t merged = 0;
  bool stream_done = false;

  std::unique_lock lk(mu_);
  for (;;) {
    if (fatal_) {
      const std::string why = *fatal_ + "; " + progress(merged, acc.observations_seen);
      lk.unlock();
      stop(true);
      throw Error("dispatch aborted: " + why);
    }

    auto ready = cluster_.deterministic_merge ? completed_.find(merged) : completed_.begin();
    if (ready != completed_.end()) {
      PartialDecomposition part = std::move(ready->second);
      completed_.erase(ready);
      lk.unlock();
      acc = merge(acc, part, budget_);
      lk.lock();
      ++merged;
      cv_.notify_all();
      continue;
    }

    if (auto slot = pick_slot()) {
      std::optional<Job> job;
      if (!retry_.empty()) {
        auto first = retry_.begin();
        job = Job{first->first, std::move(first->second)};
        retry_.erase(first);
      } else if (!stream_done && next_id_ < merged + window) {
        lk.unlock();
        auto chunk = counter.next();
        lk.lock();
        if (!chunk) {
          // state may have changed while unlocked; re-check before waiting
          stream_done = true;
          continue;
        }
        job = Job{next_id_++, std::move(*chunk)};
      }
      if (job) {
        // The slot may have failed while the lock was released.
        if (!slots_[*slot].alive) {
          retry_.emplace(job->id, std::move(job->chunk));
          continue;
        }
        outstanding_.insert(job->id);
        ++stats_.jobs;
        slots_[*slot].outbox.push_back(std::move(*job));
        ++slots_[*slot].in_flight;
        cv_.notify_all();
        continue;
      }
    }

    if (stream_done && retry_.empty() && outstanding_.empty() && completed_.empty()) break;

    bool any_alive = false;
    for (const auto& s : slots_) any_alive = any_alive || s.alive;
    if (!any_alive) {
      const std::string why = "all " + std::to_string(slots_.size()) + " workers failed; " +
                              progress(merged, acc.observations_seen);
      lk.unlock();
      stop(true);
      throw Error("dispatch aborted: " + why);
    }
    cv_.wait(lk);
  }
  lk.unlock();
  stop(false);

  for (std::size_t i = 0; i < slots_.size(); ++i) stats_.jobs_per_worker[i] = slots_[i].jobs_done;
  if (stats) *stats = stats_;
  Decomposition d = to_decomposition(std::move(acc), cfg);
  d.passes = counter.passes_completed();
  return d;
}

}  // namespace

Decomposition run_dispatcher(ChunkStream& stream, const DecompConfig& cfg, const InCoreDecomposer& decomposer,
                             const ClusterConfig& cluster, DispatchStats* stats) {
  const auto start = std::chrono::steady_clock::now();
  cfg.validate(stream.rows());
  cluster.validate();
  PeakScope peak(MemoryKind::dense);

  std::unique_ptr<RechunkStream> rechunked;
  ChunkStream* source = &stream;
  if (cfg.chunk_size) {
    rechunked = std::make_unique<RechunkStream>(stream, *cfg.chunk_size);
    source = rechunked.get();
  }

  Decomposition d;
  {
    Session session(cluster, decomposer, stream.rows(), cfg.budget());
    d = session.run(*source, cfg, stats);
  }
  d.algorithm = decomposer.kind == DecomposerKind::exact ? "p1" : "p12";
  d.peak_dense_values = peak.peak_bytes() / sizeof(double);
  d.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return d;
}

}  // namespace ssvd
