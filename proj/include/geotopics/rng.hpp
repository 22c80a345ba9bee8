// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace geotopics {

/// Deterministic random source: a mt19937_64 engine with stateless
/// distribution draws on top.
///
/// The std::* distribution objects keep hidden state (e.g. the spare
/// Box-Muller variate), which breaks bit-reproducible checkpoint resume.
/// Every draw here consumes a fixed, state-free recipe from the raw engine,
/// so serialize()/deserialize() of the engine alone captures the full
/// stream position.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform on (0, 1]; safe as a log() argument.
  double uniform_pos() { return 1.0 - uniform(); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller, no cached spare.
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  double lognormal(double log_mean, double log_sd) {
    return std::exp(normal(log_mean, log_sd));
  }

  /// Gamma(shape, 1), Marsaglia & Tsang (2000) squeeze method.
  double gamma(double shape);

  double beta(double a, double b);

  /// Poisson via inverse-product in log space; exact for any desk-scale mean.
  int poisson(double mean);

  std::vector<double> dirichlet(std::span<const double> alpha);

  /// Index draw proportional to exp(log_weights), max-subtracted first.
  int categorical_from_log(std::span<const double> log_weights);

  /// Index draw proportional to nonnegative weights.
  int categorical(std::span<const double> weights);

  /// Engine state as text; mt19937_64 streams round-trip exactly.
  std::string serialize() const;
  void deserialize(const std::string& text);

  /// Stream-splitting helper (splitmix64 finalizer) for per-shard seeds.
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream);

 private:
  std::mt19937_64 engine_;
};

}  // namespace geotopics
