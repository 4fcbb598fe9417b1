#ifndef SEQDES_CORE_RNG_HPP
#define SEQDES_CORE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace seqdes {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives the seed for a named stream so that results do not depend on the
// order in which streams are consumed.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

// mt19937_64 with our own variate transforms. The std distributions are
// implementation-defined, which would break byte-identical reruns across
// toolchains; the raw engine output is standardized.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // uniform double in [0, 1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // standard normal, Marsaglia polar method
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  // binomial count as a sum of Bernoulli trials; n stays small enough here
  // that the O(n) cost is irrelevant next to the likelihood work
  long binomial(long n, double p) {
    if (p <= 0.0) return 0;
    if (p >= 1.0) return n;
    long s = 0;
    for (long i = 0; i < n; ++i)
      if (uniform() < p) ++s;
    return s;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace seqdes

#endif
