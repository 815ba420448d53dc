#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <new>

namespace ssvd {

// Process-wide byte accounting for the two kinds of storage the algorithms
// hold: dense factor matrices and sparse chunk buffers. Every DenseMatrix and
// SparseChunk allocates through TrackingAllocator, so the peak working set of a
// pipeline can be measured without an instrumented malloc.
enum class MemoryKind : int { dense = 0, sparse = 1 };

class MemoryTracker {
 public:
  static void allocate(MemoryKind kind, std::size_t bytes) noexcept;
  static void release(MemoryKind kind, std::size_t bytes) noexcept;

  static std::size_t current(MemoryKind kind) noexcept;
  static std::size_t peak(MemoryKind kind) noexcept;
  /// Resets the peak of `kind` to the current level.
  static void reset_peak(MemoryKind kind) noexcept;
};

/// Measures the peak allocation above the level present at construction.
/// Not meaningful when several measured computations overlap in time.
class PeakScope {
 public:
  explicit PeakScope(MemoryKind kind) noexcept;
  std::size_t peak_bytes() const noexcept;

 private:
  MemoryKind kind_;
  std::size_t baseline_;
};

template <typename T, MemoryKind Kind>
struct TrackingAllocator {
  using value_type = T;

  TrackingAllocator() noexcept = default;
  template <typename U>
  TrackingAllocator(const TrackingAllocator<U, Kind>&) noexcept {}

  T* allocate(std::size_t n) {
    if (n > std::numeric_limits<std::size_t>::max() / sizeof(T)) throw std::bad_array_new_length();
    T* p = static_cast<T*>(::operator new(n * sizeof(T)));
    MemoryTracker::allocate(Kind, n * sizeof(T));
    return p;
  }
  void deallocate(T* p, std::size_t n) noexcept {
    MemoryTracker::release(Kind, n * sizeof(T));
    ::operator delete(p);
  }

  template <typename U>
  struct rebind {
    using other = TrackingAllocator<U, Kind>;
  };

  friend bool operator==(const TrackingAllocator&, const TrackingAllocator&) noexcept { return true; }
};

}  // namespace ssvd
