#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <numbers>
#include <thread>
#include <vector>

namespace latkit {

/// Counter-based generator: every draw is a pure function of (seed, index,
/// slot), so sample i is the same no matter which worker produces it.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t bits(std::uint64_t index, std::uint64_t slot) const {
    return mix(mix(seed_ ^ mix(index)) + slot * 0xd1b54a32d192ed03ULL);
  }

  /// Uniform in the open interval (0, 1).
  double uniform(std::uint64_t index, std::uint64_t slot) const {
    return (static_cast<double>(bits(index, slot) >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Coordinates with density exp(-pi ||x||^2), i.e. variance 1/(2 pi) each.
  void gaussian(std::uint64_t index, std::vector<double>& out) const {
    constexpr double sd = 0.3989422804014327;  // 1/sqrt(2 pi)
    for (std::size_t j = 0; j < out.size(); j += 2) {
      const double u1 = uniform(index, j), u2 = uniform(index, j + 1);
      const double r = std::sqrt(-2.0 * std::log(u1)) * sd;
      out[j] = r * std::cos(2 * std::numbers::pi * u2);
      if (j + 1 < out.size()) out[j + 1] = r * std::sin(2 * std::numbers::pi * u2);
    }
  }

 private:
  std::uint64_t seed_;
};

/// Worker count: LATKIT_THREADS if set, else the hardware count.
inline unsigned worker_count() {
  if (const char* env = std::getenv("LATKIT_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Splits [0, n) into a fixed number of chunks (independent of the worker
/// count), evaluates fn(begin, end) -> Acc on each, and returns the per-chunk
/// results in chunk order so callers can reduce deterministically.
template <class Acc, class Fn>
std::vector<Acc> chunked(std::uint64_t n, Fn&& fn, unsigned chunks = 64) {
  if (n < chunks) chunks = static_cast<unsigned>(std::max<std::uint64_t>(n, 1));
  std::vector<Acc> out(chunks);
  auto range = [&](unsigned c) {
    const std::uint64_t b = n * c / chunks, e = n * (c + 1) / chunks;
    out[c] = fn(b, e);
  };
  const unsigned workers = std::min(worker_count(), chunks);
  if (workers <= 1) {
    for (unsigned c = 0; c < chunks; ++c) range(c);
    return out;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (unsigned c = w; c < chunks; c += workers) range(c);
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace latkit
