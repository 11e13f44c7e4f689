#ifndef BVF_RNG_HPP
#define BVF_RNG_HPP

#include <cstdint>
#include <random>

namespace bvf {

/// Derives an independent stream seed from a master seed and a stream index
/// (splitmix64 on the combined word). Stochastic operations never share
/// generator state; they derive substreams from explicit seeds so results
/// are reproducible regardless of evaluation order or threading.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Convenience for nested derivations: derive_seed(derive_seed(a, b), c).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b);

/// Seeded generator with fully specified output mapping. Doubles are built
/// from the raw 64-bit stream (not std:: distributions, whose mapping is
/// implementation-defined), so runs are bit-reproducible across toolchains.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  /// Standard normal via Box-Muller; caches the second deviate.
  double normal();

  /// Unbiased integer in [0, n). n must be positive.
  std::uint64_t integer(std::uint64_t n);

  /// In-place Fisher-Yates shuffle of indices 0..n-1.
  template <typename Vec>
  void shuffle(Vec& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(integer(i));
      std::swap(v[i - 1], v[j]);
    }
  }

private:
  std::mt19937_64 eng_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

/// Inverse standard normal CDF (Acklam's rational approximation with one
/// Halley refinement; |error| < 1e-15 on (0,1)).
double inverse_normal_cdf(double p);

/// 64-bit FNV-1a content hash; stable across platforms and runs.
std::uint64_t fnv1a64(const void* data, std::size_t n);
std::uint64_t fnv1a64(const std::string& s);

}  // namespace bvf

#endif
