#include "ssvd/protocol.hpp"

#include <cmath>
#include <cstring>

#include "binary_io.hpp"
#include "ssvd/errors.hpp"

namespace ssvd {
namespace {

struct ProtocolFail {
  [[noreturn]] void operator()(const std::string& what, std::uint64_t offset) const {
    throw ProtocolError("protocol: " + what + " (at byte " + std::to_string(offset) + ")");
  }
};

using Reader = detail::ByteReader<ProtocolFail>;

void put_chunk(detail::ByteWriter& w, const SparseChunk& c) {
  w.put<std::uint64_t>(c.rows());
  w.put<std::uint64_t>(c.cols());
  w.put<std::uint64_t>(c.nnz());
  w.put_array(c.col_ptr());
  w.put_array(c.row_idx());
  w.put_array(c.values());
}

SparseChunk get_chunk(Reader& r) {
  const std::uint64_t at = r.offset();
  const auto m = r.get<std::uint64_t>("chunk rows");
  const auto n = r.get<std::uint64_t>("chunk cols");
  const auto nnz = r.get<std::uint64_t>("chunk nnz");
  if (n >= r.remaining() / 8) ProtocolFail{}("chunk column count exceeds frame", at + 8);
  SparseBuffer<std::uint64_t> col_ptr;
  SparseBuffer<std::uint32_t> row_idx;
  SparseBuffer<double> values;
  r.get_array<std::uint64_t>(col_ptr, n + 1, "col_ptr");
  r.get_array<std::uint32_t>(row_idx, nnz, "row_idx");
  r.get_array<double>(values, nnz, "values");
  try {
    return SparseChunk(static_cast<std::size_t>(m), std::move(col_ptr), std::move(row_idx), std::move(values));
  } catch (const DataError& e) {
    ProtocolFail{}(std::string("invalid chunk: ") + e.what(), at);
  }
}

struct BodyEncoder {
  detail::ByteWriter& w;

  void operator()(const JobMessage& m) const {
    w.put<std::uint8_t>(static_cast<std::uint8_t>(MessageType::job));
    w.put<std::uint64_t>(m.job_id);
    w.put<std::uint64_t>(m.budget);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(m.decomposer.kind));
    w.put<std::uint64_t>(m.decomposer.power_iters);
    w.put<std::uint64_t>(m.decomposer.seed);
    put_chunk(w, m.chunk);
  }
  void operator()(const ResultMessage& m) const {
    SSVD_REQUIRE(m.U.cols() == m.S.size(), "result message: U and S sizes disagree");
    w.put<std::uint8_t>(static_cast<std::uint8_t>(MessageType::result));
    w.put<std::uint64_t>(m.job_id);
    w.put<std::uint64_t>(m.worker_id);
    w.put<double>(m.compute_ms);
    w.put<std::uint64_t>(m.observations);
    w.put<std::uint64_t>(m.U.rows());
    w.put<std::uint64_t>(m.U.cols());
    w.put_array(m.U.data());
    w.put<std::uint64_t>(m.S.size());
    w.put_array(std::span<const double>(m.S.values()));
  }
  void operator()(const ErrorMessage& m) const {
    w.put<std::uint8_t>(static_cast<std::uint8_t>(MessageType::error));
    w.put<std::uint64_t>(m.job_id);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(m.diagnostic.size()));
    w.put_bytes(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(m.diagnostic.data()),
                                              m.diagnostic.size()));
  }
  void operator()(const ShutdownMessage&) const {
    w.put<std::uint8_t>(static_cast<std::uint8_t>(MessageType::shutdown));
  }
};

}  // namespace

std::vector<std::uint8_t> encode_frame(const Message& message) {
  detail::ByteWriter w;
  w.put<std::uint32_t>(0);
  std::visit(BodyEncoder{w}, message);
  const std::size_t payload = w.bytes().size() - 4;
  if (payload > kMaxFrameBytes) throw ProtocolError("protocol: message exceeds maximum frame size");
  auto len = detail::byteswap_if_big(static_cast<std::uint32_t>(payload));
  std::memcpy(w.bytes().data(), &len, 4);
  return std::move(w.bytes());
}

Message decode_payload(std::span<const std::uint8_t> payload) {
  // Offsets in diagnostics are relative to the start of the frame.
  Reader r(payload, ProtocolFail{}, 4);
  const auto type = r.get<std::uint8_t>("message type");
  Message out;
  switch (static_cast<MessageType>(type)) {
    case MessageType::job: {
      JobMessage m;
      m.job_id = r.get<std::uint64_t>("job_id");
      m.budget = r.get<std::uint64_t>("budget");
      const auto kind = r.get<std::uint8_t>("decomposer kind");
      if (kind > 1) ProtocolFail{}("unknown decomposer kind " + std::to_string(kind), r.offset() - 1);
      m.decomposer.kind = static_cast<DecomposerKind>(kind);
      m.decomposer.power_iters = r.get<std::uint64_t>("power_iters");
      m.decomposer.seed = r.get<std::uint64_t>("seed");
      m.chunk = get_chunk(r);
      out = std::move(m);
      break;
    }
    case MessageType::result: {
      ResultMessage m;
      m.job_id = r.get<std::uint64_t>("job_id");
      m.worker_id = r.get<std::uint64_t>("worker_id");
      m.compute_ms = r.get<double>("compute_ms");
      m.observations = r.get<std::uint64_t>("observations");
      const std::uint64_t at = r.offset();
      const auto rows = r.get<std::uint64_t>("U rows");
      const auto cols = r.get<std::uint64_t>("U cols");
      if (rows != 0 && cols > r.remaining() / 8 / rows) ProtocolFail{}("U size exceeds frame", at);
      m.U = DenseMatrix(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
      std::vector<double> data;
      r.get_array<double>(data, rows * cols, "U data");
      std::copy(data.begin(), data.end(), m.U.data().begin());
      const std::uint64_t s_at = r.offset();
      const auto len = r.get<std::uint64_t>("S length");
      if (len != cols) ProtocolFail{}("S length does not match U columns", s_at);
      std::vector<double> s;
      r.get_array<double>(s, len, "S values");
      try {
        m.S = Spectrum(std::move(s));
      } catch (const ContractError& e) {
        ProtocolFail{}(std::string("invalid spectrum: ") + e.what(), s_at);
      }
      out = std::move(m);
      break;
    }
    case MessageType::error: {
      ErrorMessage m;
      m.job_id = r.get<std::uint64_t>("job_id");
      const auto len = r.get<std::uint32_t>("diagnostic length");
      auto bytes = r.get_bytes(len, "diagnostic");
      m.diagnostic.assign(reinterpret_cast<const char*>(bytes.data()), bytes.size());
      out = std::move(m);
      break;
    }
    case MessageType::shutdown:
      out = ShutdownMessage{};
      break;
    default:
      ProtocolFail{}("unknown message type " + std::to_string(type), 4);
  }
  if (r.remaining() != 0) ProtocolFail{}("trailing bytes in frame", r.offset());
  return out;
}

Message decode_frame(std::span<const std::uint8_t> frame) {
  Reader r(frame, ProtocolFail{});
  const auto len = r.get<std::uint32_t>("frame length");
  if (len > kMaxFrameBytes) ProtocolFail{}("frame length exceeds limit", 0);
  if (len != r.remaining()) ProtocolFail{}("frame length does not match data", 0);
  return decode_payload(frame.subspan(4));
}

std::uint64_t peek_job_id(std::span<const std::uint8_t> payload) noexcept {
  if (payload.size() < 9) return 0;
  std::uint64_t id = 0;
  std::memcpy(&id, payload.data() + 1, 8);
  return detail::byteswap_if_big(id);
}

}  // namespace ssvd
