#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ssvd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke a precondition (dimension mismatch, bad rank budget, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration detected before any work was done.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input data is unusable (non-finite values, empty corpus, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Malformed binary input. Carries the byte offset where parsing failed.
class FormatError : public DataError {
 public:
  FormatError(const std::string& what, std::uint64_t offset);
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Wire-level failure in the dispatcher/worker protocol.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

#define SSVD_REQUIRE(cond, msg)                   \
  do {                                            \
    if (!(cond)) throw ::ssvd::ContractError(msg); \
  } while (false)

}  // namespace ssvd
