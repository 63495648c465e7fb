#pragma once

#include <cstdint>
#include <random>

namespace dreamer {

/// Deterministic random stream used by every stochastic component.
///
/// The bit generator is std::mt19937_64 (fully specified by the C++ standard,
/// so identical across platforms). The standard distributions are not, so
/// uniforms and normals are derived here explicitly:
///   uniform01  = (next() >> 11) * 2^-53, in [0, 1)
///   normal     = Box-Muller on two uniforms, both outputs used in order
///   uniform_int(n) = Lemire-free rejection on next() modulo n
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double normal();

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_int(std::uint64_t n);

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace dreamer
