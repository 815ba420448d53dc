#include <algorithm>
#include <cstring>
#include <memory>
#include <thread>

#include "doctest.h"
#include "ssvd/dispatcher.hpp"
#include "ssvd/net.hpp"
#include "ssvd/p1.hpp"
#include "ssvd/protocol.hpp"
#include "ssvd/worker.hpp"
#include "test_util.hpp"

using namespace ssvd;

namespace {

class TestCluster {
 public:
  explicit TestCluster(std::vector<WorkerOptions> options) {
    for (auto& o : options) {
      workers_.push_back(std::make_unique<Worker>("127.0.0.1:0", o));
      config.workers.push_back("127.0.0.1:" + std::to_string(workers_.back()->port()));
    }
    for (auto& w : workers_) threads_.emplace_back([&w] { w->serve(); });
  }
  explicit TestCluster(std::size_t nodes) : TestCluster(plain(nodes)) {}
  ~TestCluster() {
    for (auto& w : workers_) w->stop();
    for (auto& t : threads_) t.join();
  }
  Worker& worker(std::size_t i) { return *workers_[i]; }

  ClusterConfig config;

 private:
  static std::vector<WorkerOptions> plain(std::size_t nodes) {
    std::vector<WorkerOptions> o;
    for (std::size_t i = 0; i < nodes; ++i) o.push_back({i, std::nullopt});
    return o;
  }
  std::vector<std::unique_ptr<Worker>> workers_;
  std::vector<std::thread> threads_;
};

DecompConfig config(std::size_t k, std::size_t l) {
  DecompConfig cfg;
  cfg.k = k;
  cfg.l = l;
  return cfg;
}

SparseChunk random_chunk(std::mt19937_64& rng, std::size_t max_dim) {
  std::uniform_int_distribution<std::size_t> dim(0, max_dim);
  const std::size_t m = std::max<std::size_t>(1, dim(rng)), n = dim(rng);
  return SparseChunk::from_dense(testutil::random_dense(m, n, rng(), 0.3));
}

Message random_message(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> type(0, 3);
  std::uniform_int_distribution<std::size_t> dim(0, 8);
  switch (type(rng)) {
    case 0: {
      JobMessage j;
      j.job_id = rng();
      j.budget = rng() % 100;
      j.decomposer = rng() % 2 ? InCoreDecomposer::exact() : InCoreDecomposer::stochastic(rng() % 5, rng());
      j.chunk = random_chunk(rng, 12);
      return j;
    }
    case 1: {
      ResultMessage r;
      r.job_id = rng();
      r.worker_id = rng();
      r.compute_ms = std::uniform_real_distribution<double>(0, 1e4)(rng);
      r.observations = rng();
      const std::size_t m = dim(rng), k = dim(rng);
      r.U = testutil::random_dense(m, k, rng());
      std::vector<double> s(k);
      for (auto& v : s) v = std::abs(std::normal_distribution<double>()(rng));
      std::sort(s.rbegin(), s.rend());
      r.S = Spectrum(std::move(s));
      return r;
    }
    case 2: {
      std::string text(dim(rng) * 5, 'x');
      for (auto& c : text) c = static_cast<char>(32 + rng() % 95);
      return ErrorMessage{rng(), text + "\xc3\xa9"};
    }
    default:
      return ShutdownMessage{};
  }
}

Message exchange(net::Socket& sock, const Message& m) {
  net::send_message(sock, m);
  auto payload = net::recv_payload(sock);
  REQUIRE(payload.has_value());
  return decode_payload(*payload);
}

net::Socket connect(const Worker& w) { return net::connect_to({"127.0.0.1", w.port()}); }

double max_abs_diff(const Spectrum& a, const Spectrum& b) {
  REQUIRE(a.size() == b.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST_CASE("protocol round trip") {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 1000; ++i) {
    const Message m = random_message(rng);
    const auto frame = encode_frame(m);
    CHECK(decode_frame(frame) == m);
    CHECK(encode_frame(decode_frame(frame)) == frame);
  }
}

TEST_CASE("protocol framing") {
  JobMessage job;
  job.job_id = 42;
  job.budget = 3;
  job.chunk = SparseChunk::from_dense(DenseMatrix::from_rows({{1, 0}, {0, 2}}));
  const auto frame = encode_frame(job);
  SUBCASE("layout") {
    std::uint32_t len = 0;
    std::memcpy(&len, frame.data(), 4);
    CHECK(len == frame.size() - 4);
    CHECK(frame[4] == 0x01);
    CHECK(encode_frame(ShutdownMessage{}) == std::vector<std::uint8_t>{1, 0, 0, 0, 4});
    CHECK(peek_job_id(std::span(frame).subspan(4)) == 42);
  }
  SUBCASE("truncation") {
    for (std::size_t cut : {0, 3, 5, 12, 30}) {
      const std::vector<std::uint8_t> part(frame.begin(), frame.begin() + static_cast<std::ptrdiff_t>(cut));
      CHECK_THROWS_AS(decode_frame(part), ProtocolError);
    }
  }
  SUBCASE("unknown type") {
    auto bad = frame;
    bad[4] = 9;
    CHECK_THROWS_AS(decode_frame(bad), ProtocolError);
  }
  SUBCASE("invalid chunk body") {
    auto bad = frame;
    bad.back() = 0;  // last value byte zeroed keeps it finite; corrupt a row index instead
    const std::size_t row_idx_offset = 4 + 1 + 8 * 4 + 1 + 8 * 3 + 8 * 3;
    bad[row_idx_offset] = 0xff;
    try {
      decode_frame(bad);
      FAIL("expected a protocol error");
    } catch (const ProtocolError& e) {
      CHECK(std::string(e.what()).find("at byte") != std::string::npos);
    }
  }
  SUBCASE("trailing bytes") {
    auto bad = frame;
    bad.push_back(0);
    CHECK_THROWS_AS(decode_frame(bad), ProtocolError);
  }
}

TEST_CASE("endpoints") {
  const auto e = net::parse_endpoint("localhost:8080");
  CHECK(e.host == "localhost");
  CHECK(e.port == 8080);
  CHECK(net::parse_endpoints("a:1,b:2").size() == 2);
  CHECK_THROWS_AS(net::parse_endpoint("nohost"), ConfigError);
  CHECK_THROWS_AS(net::parse_endpoint("h:99999"), ConfigError);
  CHECK_THROWS_AS(net::parse_endpoint("h:x"), ConfigError);
}

TEST_CASE("worker") {
  TestCluster cluster(1);
  auto sock = connect(cluster.worker(0));
  SUBCASE("empty chunk") {
    JobMessage job{1, 3, InCoreDecomposer::exact(), SparseChunk(4)};
    const auto r = std::get<ResultMessage>(exchange(sock, job));
    CHECK(r.job_id == 1);
    CHECK(r.S.empty());
    CHECK(r.U.rows() == 4);
  }
  SUBCASE("diag(3,2)") {
    JobMessage job{2, 2, InCoreDecomposer::exact(), SparseChunk::from_dense(DenseMatrix::from_rows({{3, 0}, {0, 2}}))};
    const auto r = std::get<ResultMessage>(exchange(sock, job));
    CHECK(r.S.values() == std::vector<double>{3.0, 2.0});
    CHECK(r.observations == 2);
  }
  SUBCASE("random jobs equal the local computation") {
    std::mt19937_64 rng(5);
    for (std::uint64_t i = 0; i < 10; ++i) {
      JobMessage job{i, 4, i % 2 ? InCoreDecomposer::stochastic(1, i) : InCoreDecomposer::exact(),
                     SparseChunk::from_dense(testutil::random_dense(10, 15, rng(), 0.4))};
      const auto r = std::get<ResultMessage>(exchange(sock, job));
      const auto local = decompose_chunk_incore(job.chunk, 4, job.decomposer);
      CHECK(r.job_id == i);
      CHECK(r.S == local.S);
      CHECK(r.U == local.U);
    }
    CHECK(cluster.worker(0).jobs_served() == 10);
  }
  SUBCASE("rejected job gets an error reply and the connection stays usable") {
    JobMessage job{9, 0, InCoreDecomposer::exact(), SparseChunk(3)};
    const auto e = std::get<ErrorMessage>(exchange(sock, job));
    CHECK(e.job_id == 9);
    CHECK_FALSE(e.diagnostic.empty());
    job.budget = 1;
    CHECK(std::holds_alternative<ResultMessage>(exchange(sock, job)));
  }
  SUBCASE("malformed body gets an error reply with the job id") {
    auto frame = encode_frame(JobMessage{31, 2, InCoreDecomposer::exact(), SparseChunk::from_dense(DenseMatrix::identity(2))});
    frame.pop_back();
    frame[0] -= 1;  // keep the length prefix consistent with the shorter body
    sock.send_all(frame);
    auto payload = net::recv_payload(sock);
    REQUIRE(payload);
    const auto e = std::get<ErrorMessage>(decode_payload(*payload));
    CHECK(e.job_id == 31);
    CHECK(e.diagnostic.find("at byte") != std::string::npos);
  }
  SUBCASE("unframeable input gets an error reply, then the worker accepts again") {
    const std::uint8_t huge[] = {0xff, 0xff, 0xff, 0xff, 1};
    sock.send_all(huge);
    auto payload = net::recv_payload(sock);
    REQUIRE(payload);
    CHECK(std::holds_alternative<ErrorMessage>(decode_payload(*payload)));
    auto again = connect(cluster.worker(0));
    JobMessage job{3, 1, InCoreDecomposer::exact(), SparseChunk(2)};
    CHECK(std::holds_alternative<ResultMessage>(exchange(again, job)));
  }
  SUBCASE("non-job messages are rejected") {
    CHECK(std::holds_alternative<ErrorMessage>(exchange(sock, ErrorMessage{5, "hi"})));
  }
}

TEST_CASE("worker shutdown") {
  Worker w("127.0.0.1:0");
  std::thread t([&] { w.serve(); });
  auto sock = connect(w);
  net::send_message(sock, ShutdownMessage{});
  t.join();
  CHECK(w.jobs_served() == 0);
}

TEST_CASE("dispatcher equals the local fold") {
  const DenseMatrix a = testutil::random_dense(30, 240, 3, 0.2);
  for (bool stochastic : {false, true}) {
    auto stream = testutil::chunked(a, 20);
    const auto cfg = config(4, 3);
    const auto dec = stochastic ? InCoreDecomposer::stochastic(1, 8) : InCoreDecomposer::exact();
    const auto local = decompose_p1(stream, cfg, dec);
    for (std::size_t nodes : {1, 2, 4}) {
      TestCluster cluster(nodes);
      for (std::size_t mif : {1, 3}) {
        cluster.config.max_in_flight = mif;
        PassCounter pc(stream);
        DispatchStats stats;
        const auto d = run_dispatcher(pc, cfg, dec, cluster.config, &stats);
        CHECK(count_passes(pc) == 1);
        CHECK(max_abs_diff(d.S, local.S) <= 1e-12);
        CHECK(d.algorithm == (stochastic ? "p12" : "p1"));
        CHECK(d.passes == 1);
        CHECK(d.observations == 240);
        CHECK(stats.jobs == 12);
        CHECK(stats.redispatched == 0);
        CHECK(stats.max_buffered <= nodes * mif);
        std::size_t total = 0;
        for (auto j : stats.jobs_per_worker) total += j;
        CHECK(total == 12);
      }
    }
  }
}

TEST_CASE("dispatcher unordered merge") {
  const DenseMatrix a = testutil::planted(20, 200, {9, 5, 3}, 4);
  auto stream = testutil::chunked(a, 10);
  const auto local = decompose_p1(stream, config(3, 2));
  TestCluster cluster(3);
  cluster.config.deterministic_merge = false;
  cluster.config.max_in_flight = 2;
  const auto d = run_dispatcher(stream, config(3, 2), InCoreDecomposer::exact(), cluster.config);
  // exact rank within budget, so merge order only changes round-off
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(d.S[i] - local.S[i]) <= 1e-10 * local.S[0]);
}

TEST_CASE("dispatcher worker failures") {
  const DenseMatrix a = testutil::random_dense(20, 200, 5, 0.3);
  auto stream = testutil::chunked(a, 10);
  const auto local = decompose_p1(stream, config(3, 2));
  SUBCASE("a worker dying mid-run has its jobs re-sent") {
    TestCluster cluster({{0, std::nullopt}, {1, std::size_t{2}}, {2, std::nullopt}});
    DispatchStats stats;
    const auto d = run_dispatcher(stream, config(3, 2), InCoreDecomposer::exact(), cluster.config, &stats);
    CHECK(max_abs_diff(d.S, local.S) <= 1e-12);
    CHECK(stats.failed_workers == 1);
    CHECK(stats.redispatched >= 1);
    CHECK(stats.jobs_per_worker[1] == 2);
  }
  SUBCASE("an unreachable worker is skipped") {
    TestCluster cluster(1);
    std::uint16_t dead_port;
    {
      net::Listener l({"127.0.0.1", 0});
      dead_port = l.port();
    }
    cluster.config.workers.push_back("127.0.0.1:" + std::to_string(dead_port));
    DispatchStats stats;
    const auto d = run_dispatcher(stream, config(3, 2), InCoreDecomposer::exact(), cluster.config, &stats);
    CHECK(max_abs_diff(d.S, local.S) <= 1e-12);
    CHECK(stats.failed_workers == 1);
  }
  SUBCASE("total failure aborts with a progress report") {
    TestCluster cluster({{0, std::size_t{3}}, {1, std::size_t{1}}});
    try {
      run_dispatcher(stream, config(3, 2), InCoreDecomposer::exact(), cluster.config);
      FAIL("expected the dispatch to abort");
    } catch (const Error& e) {
      const std::string what = e.what();
      CHECK(what.find("merged") != std::string::npos);
      CHECK(what.find("of") != std::string::npos);
    }
  }
  SUBCASE("shutdown_workers stops the cluster") {
    Worker w("127.0.0.1:0");
    std::thread t([&] { w.serve(); });
    ClusterConfig c;
    c.workers = {"127.0.0.1:" + std::to_string(w.port())};
    c.shutdown_workers = true;
    const auto d = run_dispatcher(stream, config(3, 2), InCoreDecomposer::exact(), c);
    t.join();  // returns only because of the shutdown message
    CHECK(max_abs_diff(d.S, local.S) <= 1e-12);
  }
  SUBCASE("invalid cluster configuration") {
    ClusterConfig c;
    CHECK_THROWS_AS(run_dispatcher(stream, config(3, 2), InCoreDecomposer::exact(), c), ConfigError);
    c.workers = {"127.0.0.1:1"};
    c.max_in_flight = 0;
    CHECK_THROWS_AS(run_dispatcher(stream, config(3, 2), InCoreDecomposer::exact(), c), ConfigError);
  }
}
