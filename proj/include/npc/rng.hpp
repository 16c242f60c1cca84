#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace npc {

/// SplitMix64 finalizer; used to derive sub-stream seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seeded generator built on std::mt19937_64, whose output sequence is fixed by
/// the standard. Every derived quantity (bounded integers, uniforms, normals)
/// is computed here rather than through <random> distributions, whose
/// algorithms are implementation-defined.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  /// Sub-stream for replication `index`: seed = splitmix64(seed ^ splitmix64(index)).
  Rng substream(std::uint64_t index) const;

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform integer in [0, bound), unbiased (rejection sampling).
  std::uint64_t below(std::uint64_t bound);
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller (one value per call, the pair's second half cached).
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace npc
