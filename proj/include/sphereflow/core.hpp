#ifndef SPHEREFLOW_CORE_HPP
#define SPHEREFLOW_CORE_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sphereflow {

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kHalfPi = 0.5 * kPi;

// Thrown when an input signal/matrix has the wrong dimensions.
class ShapeError : public std::invalid_argument {
 public:
  explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

// Thrown when an operation requires the other pixel ordering (RING vs NESTED).
class OrderingError : public std::invalid_argument {
 public:
  explicit OrderingError(const std::string& what) : std::invalid_argument(what) {}
};

// Thrown when a problem exceeds the dense desk-scale limits.
class CapacityError : public std::runtime_error {
 public:
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a linear system is numerically rank-deficient.
class NumericalRankError : public std::runtime_error {
 public:
  explicit NumericalRankError(const std::string& what) : std::runtime_error(what) {}
};

// Multi-channel real signal indexed by sampling pixel. Channel-major storage:
// values[c * n + i] is channel c at pixel i.
struct MapSignal {
  std::size_t n = 0;
  std::size_t channels = 1;
  std::vector<double> values;

  MapSignal() = default;
  MapSignal(std::size_t n_, std::size_t channels_)
      : n(n_), channels(channels_), values(n_ * channels_, 0.0) {}

  double* channel(std::size_t c) { return values.data() + c * n; }
  const double* channel(std::size_t c) const { return values.data() + c * n; }
  double& at(std::size_t c, std::size_t i) { return values[c * n + i]; }
  double at(std::size_t c, std::size_t i) const { return values[c * n + i]; }
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic RNG. All randomness in the project flows through this type so
// that seeded runs are reproducible bit-for-bit: xoshiro-free, fully pinned
// generator (splitmix64 stream) with an explicit Box-Muller normal sampler.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // Derive an independent stream, e.g. one per map or per trial.
  Rng fork(std::uint64_t tag) const {
    std::uint64_t s = state_;
    std::uint64_t a = splitmix64(s);
    std::uint64_t t = tag;
    std::uint64_t b = splitmix64(t);
    return Rng(a ^ (b + 0x9e3779b97f4a7c15ULL));
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  // Uniform in [0, 1).
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound) without modulo bias.
  std::uint64_t bounded(std::uint64_t bound) {
    std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  // Standard normal via Box-Muller.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(kTwoPi * u2);
    have_spare_ = true;
    return r * std::cos(kTwoPi * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = std::size_t(bounded(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Runs fn(i) for i in [0, count). Worker count is capped by the
// SPHEREFLOW_THREADS environment variable. Calls must write to disjoint
// locations; the partition of indices is static so results never depend on
// scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace sphereflow

#endif  // SPHEREFLOW_CORE_HPP
