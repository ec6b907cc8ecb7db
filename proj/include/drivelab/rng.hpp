#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace drivelab {

// Seeded generator with library-independent sampling helpers. The standard
// distributions are implementation-defined, which would break cross-build
// replay, so only the raw engine output is used.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  void reseed(std::uint64_t seed) { engine_.seed(seed); }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform index in [0, n). n must be > 0.
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

  std::string state() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
  }

  bool operator==(const Rng& o) const { return engine_ == o.engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace drivelab
