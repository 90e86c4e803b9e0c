#pragma once

#include <atomic>
#include <bit>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string_view>
#include <thread>
#include <type_traits>
#include <vector>

namespace settest {

/// File or input-format problem (CLI exit code 2).
class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Contract violation in supplied data or arguments (CLI exit code 2).
class validation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// All pairwise distances collapsed to zero, so no usable kernel bandwidth
/// exists (CLI exit code 3).
class degenerate_scale_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// SplitMix64 step.
inline std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Bit pattern of a double, for feeding real-valued tags into seed derivation.
inline std::uint64_t seed_bits(double v) noexcept {
  return std::bit_cast<std::uint64_t>(v);
}

/// FNV-1a hash of a string tag.
inline std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Derives an independent stream seed from a master seed and integer tags.
/// Equal inputs give equal outputs regardless of when or where the call
/// happens, which keeps results independent of scheduling.
template <typename... Tags>
std::uint64_t derive_seed(std::uint64_t master, Tags... tags) {
  static_assert((std::is_integral_v<Tags> && ...),
                "hash real-valued tags with seed_bits() first");
  std::uint64_t state = master;
  std::uint64_t out = splitmix64(state);
  ((state ^= static_cast<std::uint64_t>(tags) + 0x9e3779b97f4a7c15ULL +
             (state << 6) + (state >> 2),
    out = splitmix64(state)),
   ...);
  return out;
}

inline std::mt19937_64 make_engine(std::uint64_t seed) {
  return std::mt19937_64(seed);
}

namespace detail {
inline std::atomic<int>& thread_cap_storage() {
  static std::atomic<int> cap{0};
  return cap;
}
}  // namespace detail

/// Caps the number of worker threads used by parallel_for when the caller
/// does not request an explicit count. 0 restores the hardware default.
inline void set_thread_cap(int n) { detail::thread_cap_storage().store(n); }

inline int resolve_threads(int requested) {
  int n = requested > 0 ? requested : detail::thread_cap_storage().load();
  if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
  return n > 0 ? n : 1;
}

/// Runs fn(i) for every i in [0, n). Each index runs exactly once and
/// writes to caller-owned, index-addressed storage, so results do not
/// depend on the thread count or schedule.
inline void parallel_for(std::size_t n,
                         const std::function<void(std::size_t)>& fn,
                         int threads = 0) {
  const int k = resolve_threads(threads);
  if (k <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      if (failed.load(std::memory_order_relaxed)) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
      }
    }
  };
  const std::size_t extra =
      std::min<std::size_t>(static_cast<std::size_t>(k), n) - 1;
  std::vector<std::thread> pool;
  pool.reserve(extra);
  for (std::size_t t = 0; t < extra; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace settest
