#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace symrfm {

/// Seeded generator used for every sampling decision in the repo.
/// mt19937_64 with rejection sampling for bounded draws, so index sets are
/// bit-identical across platforms and standard libraries
/// (std::uniform_int_distribution is implementation-defined; this is not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  /// Uniform draw from {0, ..., bound-1}.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("rng bound must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v = gen_();
    while (v >= limit) v = gen_();
    return v % bound;
  }

  /// Uniform k-subset of {0, ..., population-1} via partial Fisher-Yates,
  /// returned sorted.
  std::vector<std::int32_t> sample(std::int32_t population, std::int32_t count) {
    if (count < 0 || count > population)
      throw std::invalid_argument("sample count out of range");
    std::vector<std::int32_t> idx(population);
    for (std::int32_t i = 0; i < population; ++i) idx[i] = i;
    for (std::int32_t i = 0; i < count; ++i) {
      auto j = static_cast<std::int32_t>(below(static_cast<std::uint64_t>(population - i))) + i;
      std::swap(idx[i], idx[j]);
    }
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
    return idx;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace symrfm
