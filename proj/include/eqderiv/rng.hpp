#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace eqderiv {

/// Seeded random stream. The draws are implemented here rather than with the
/// <random> distributions so output is identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  /// Independent stream for record `index` of a run seeded with `seed`.
  static Rng stream(std::uint64_t seed, std::uint64_t index);
  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next_u64();
  double uniform();                      // [0, 1)
  std::size_t below(std::size_t n);      // [0, n), n > 0
  long long range(long long lo, long long hi);  // [lo, hi]
  bool bernoulli(double p);
  double normal(double mean, double sigma);

  /// Index drawn with probability proportional to weights[i]. Weights must be
  /// non-negative with a positive sum.
  std::size_t weighted(std::span<const double> weights);

  template <typename T>
  const T& pick(const std::vector<T>& xs) {
    return xs[below(xs.size())];
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace eqderiv
