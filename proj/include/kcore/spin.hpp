#pragma once

#include <atomic>
#include <thread>

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#endif

namespace kcore {

inline void cpu_relax() noexcept {
#if defined(__x86_64__) || defined(__i386__)
  _mm_pause();
#endif
}

/// Bounded exponential spinning that degrades to yielding. Waiters must not
/// starve the lock holder when workers outnumber cores.
class Backoff {
 public:
  void pause() noexcept {
    if (spins_ < kSpinLimit) {
      for (unsigned i = 0; i < (1u << spins_); ++i) cpu_relax();
      ++spins_;
    } else {
      std::this_thread::yield();
    }
  }

  void reset() noexcept { spins_ = 0; }

 private:
  static constexpr unsigned kSpinLimit = 6;
  unsigned spins_ = 0;
};

/// Test-and-test-and-set lock satisfying Lockable.
class SpinLock {
 public:
  void lock() noexcept {
    Backoff backoff;
    for (;;) {
      if (!flag_.load(std::memory_order_relaxed) &&
          !flag_.exchange(true, std::memory_order_acquire)) {
        return;
      }
      backoff.pause();
    }
  }

  bool try_lock() noexcept {
    return !flag_.load(std::memory_order_relaxed) &&
           !flag_.exchange(true, std::memory_order_acquire);
  }

  void unlock() noexcept { flag_.store(false, std::memory_order_release); }

 private:
  std::atomic<bool> flag_{false};
};

}  // namespace kcore
