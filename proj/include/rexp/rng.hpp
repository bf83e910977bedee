#pragma once

#include <cstdint>
#include <cmath>

namespace rexp {

// Purpose tags for deterministic substream derivation. Adding
// replications or purposes never perturbs existing streams.
enum class StreamPurpose : std::uint64_t {
  TrainCovariates = 1,
  TrainErrors = 2,
  TuneCovariates = 3,
  TuneErrors = 4,
  ExpectileCache = 5,
  Generic = 6,
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

// Small counter-free xoshiro256** stream; state is seeded from
// (master seed, replication index, purpose) through splitmix64 so
// substreams are independent and reproducible.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t replication,
            StreamPurpose purpose) {
    std::uint64_t s = master_seed;
    s ^= 0x8f3c9a25ULL + (replication << 1);
    s = detail::splitmix64(s);
    s ^= static_cast<std::uint64_t>(purpose) * 0xd1342543de82ef95ULL;
    s ^= replication * 0xaf251af3b0f025b5ULL;
    for (auto& word : state_) word = detail::splitmix64(s);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on (0,1); never returns 0 so -log(u) is safe.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Marsaglia polar rejection.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

  double student_t3() {
    const double z = normal();
    double g = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double w = normal();
      g += w * w;
    }
    return z / std::sqrt(g / 3.0);
  }

  double weibull(double shape, double scale) {
    return scale * std::pow(-std::log(uniform()), 1.0 / shape);
  }

  double lognormal(double sigma) { return std::exp(sigma * normal()); }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace rexp
