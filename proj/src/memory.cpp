#include "ssvd/memory.hpp"

namespace ssvd {
namespace {

struct Counters {
  std::atomic<std::size_t> current{0};
  std::atomic<std::size_t> peak{0};
};

Counters& counters(MemoryKind kind) noexcept {
  static Counters table[2];
  return table[static_cast<int>(kind)];
}

}  // namespace

void MemoryTracker::allocate(MemoryKind kind, std::size_t bytes) noexcept {
  Counters& c = counters(kind);
  const std::size_t now = c.current.fetch_add(bytes, std::memory_order_relaxed) + bytes;
  std::size_t seen = c.peak.load(std::memory_order_relaxed);
  while (now > seen && !c.peak.compare_exchange_weak(seen, now, std::memory_order_relaxed)) {
  }
}

void MemoryTracker::release(MemoryKind kind, std::size_t bytes) noexcept {
  counters(kind).current.fetch_sub(bytes, std::memory_order_relaxed);
}

std::size_t MemoryTracker::current(MemoryKind kind) noexcept {
  return counters(kind).current.load(std::memory_order_relaxed);
}

std::size_t MemoryTracker::peak(MemoryKind kind) noexcept {
  return counters(kind).peak.load(std::memory_order_relaxed);
}

void MemoryTracker::reset_peak(MemoryKind kind) noexcept {
  Counters& c = counters(kind);
  c.peak.store(c.current.load(std::memory_order_relaxed), std::memory_order_relaxed);
}

PeakScope::PeakScope(MemoryKind kind) noexcept : kind_(kind), baseline_(MemoryTracker::current(kind)) {
  MemoryTracker::reset_peak(kind);
}

std::size_t PeakScope::peak_bytes() const noexcept {
  const std::size_t p = MemoryTracker::peak(kind_);
  return p > baseline_ ? p - baseline_ : 0;
}

}  // namespace ssvd
