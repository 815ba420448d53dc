#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ssvd/dense.hpp"
#include "ssvd/p1.hpp"
#include "ssvd/sparse.hpp"

// Dispatcher/worker wire protocol.
//
// frame   := u32 length | u8 type | body        (length counts type + body)
// job     := u64 job_id | u64 budget | u8 kind | u64 power_iters | u64 seed | chunk
// chunk   := u64 m | u64 n | u64 nnz | (n+1) x u64 col_ptr | nnz x u32 row_idx | nnz x f64 values
// result  := u64 job_id | u64 worker_id | f64 compute_ms | u64 observations
//            | u64 rows | u64 cols | rows*cols x f64 U (column-major) | u64 len | len x f64 S
// error   := u64 job_id | u32 len | len bytes UTF-8 diagnostic
// shutdown:= (empty)
// All fields little-endian, same conventions as the chunk stream file.
namespace ssvd {

enum class MessageType : std::uint8_t { job = 0x01, result = 0x02, error = 0x03, shutdown = 0x04 };

/// Upper bound on a frame's declared length; larger frames are rejected
/// before any allocation.
inline constexpr std::uint32_t kMaxFrameBytes = 1u << 30;

struct JobMessage {
  std::uint64_t job_id = 0;
  std::uint64_t budget = 0;
  InCoreDecomposer decomposer;
  SparseChunk chunk;

  friend bool operator==(const JobMessage& a, const JobMessage& b) {
    return a.job_id == b.job_id && a.budget == b.budget && a.decomposer.kind == b.decomposer.kind &&
           a.decomposer.power_iters == b.decomposer.power_iters && a.decomposer.seed == b.decomposer.seed &&
           a.chunk == b.chunk;
  }
};

struct ResultMessage {
  std::uint64_t job_id = 0;
  std::uint64_t worker_id = 0;
  double compute_ms = 0.0;
  std::uint64_t observations = 0;
  DenseMatrix U;
  Spectrum S;

  friend bool operator==(const ResultMessage&, const ResultMessage&) = default;
};

struct ErrorMessage {
  std::uint64_t job_id = 0;
  std::string diagnostic;

  friend bool operator==(const ErrorMessage&, const ErrorMessage&) = default;
};

struct ShutdownMessage {
  friend bool operator==(const ShutdownMessage&, const ShutdownMessage&) = default;
};

using Message = std::variant<JobMessage, ResultMessage, ErrorMessage, ShutdownMessage>;

/// Complete frame, length prefix included.
std::vector<std::uint8_t> encode_frame(const Message& message);
/// Parses a complete frame. Throws ProtocolError naming the byte offset.
Message decode_frame(std::span<const std::uint8_t> frame);
/// Parses the part of a frame after the length field (type byte + body).
Message decode_payload(std::span<const std::uint8_t> payload);

/// Best-effort job id of a payload whose body failed to parse (0 if absent).
std::uint64_t peek_job_id(std::span<const std::uint8_t> payload) noexcept;

}  // namespace ssvd
