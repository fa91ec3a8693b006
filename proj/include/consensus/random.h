#ifndef CONSENSUS_RANDOM_H_
#define CONSENSUS_RANDOM_H_

#include <cstdint>

namespace consensus {

// SplitMix64 (Steele, Lea, Flood 2014). Every random draw in the library
// flows from one of these; split() derives an independent child stream so
// sub-runs (initial profile, switching choices, sampling, activation order)
// are reproducible on their own. Output is bit-identical across platforms.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  constexpr result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return Mix(state_);
  }

  // Child stream for `stream`; does not advance this generator.
  constexpr SplitMix64 split(std::uint64_t stream) const {
    return SplitMix64(Mix(state_ ^ Mix(stream + 0x632be59bd9b4e019ULL)));
  }

  // Uniform in [0, 1) with 53 random bits.
  constexpr double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  constexpr double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform in {0, ..., n-1}; n > 0.
  constexpr std::uint64_t index(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>((*this)()) * n) >> 64);
  }

  constexpr std::uint64_t state() const { return state_; }

 private:
  static constexpr std::uint64_t Mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace consensus

#endif  // CONSENSUS_RANDOM_H_
