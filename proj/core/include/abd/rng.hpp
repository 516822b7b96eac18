// Seeded pseudo-random source with distribution helpers whose output depends
// only on the seed (std:: distributions are implementation-defined, which
// would break reproducible datasets across standard libraries).

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace abd {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  // Uniform index in [0, n).
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform_int(0, std::int64_t(n) - 1)); }
  // Uniform real in [lo, hi].
  double uniform_real(double lo, double hi);
  bool coin() { return (next() >> 63) != 0; }
  // k distinct values from [0, n), in draw order.
  std::vector<int> sample_without_replacement(int n, int k);

 private:
  std::mt19937_64 engine_;
};

// Mixes a base seed with a sequence of stream labels (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> labels);

}  // namespace abd
