#pragma once

#include <cstdint>
#include <random>

namespace marma {

/// Seeded random stream. All draws are produced from raw 64-bit engine output
/// so sequences are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream for item `index` of a parallel job seeded by `seed`.
  /// The result does not depend on which thread consumes it.
  static Rng substream(std::uint64_t seed, std::uint64_t index);

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  double exponential();
  /// Gamma(shape = 3/2, scale = 1), as Exp(1) + Z^2 / 2.
  double gamma_three_halves();

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// splitmix64 finalizer; used to derive substream seeds.
std::uint64_t mix_seed(std::uint64_t x);

}  // namespace marma
