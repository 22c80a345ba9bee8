// Apache License, Version 2.0, refer to LICENSE.txt

#include "geotopics/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "geotopics/error.hpp"

namespace geotopics {

double Rng::normal() {
  const double u1 = uniform_pos();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) throw DomainError("gamma: shape must be > 0");
  if (shape < 1.0) {
    // Boost to shape+1 and scale back by u^(1/shape).
    const double g = gamma(shape + 1.0);
    return g * std::pow(uniform_pos(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_pos();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double Rng::beta(double a, double b) {
  const double x = gamma(a);
  const double y = gamma(b);
  return x / (x + y);
}

int Rng::poisson(double mean) {
  if (!(mean >= 0.0)) throw DomainError("poisson: mean must be >= 0");
  if (mean == 0.0) return 0;
  int k = 0;
  double log_prod = 0.0;
  for (;;) {
    log_prod += std::log(uniform_pos());
    if (log_prod < -mean) return k;
    ++k;
  }
}

std::vector<double> Rng::dirichlet(std::span<const double> alpha) {
  std::vector<double> out(alpha.size());
  double total = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    out[i] = gamma(alpha[i]);
    total += out[i];
  }
  for (double& w : out) w /= total;
  return out;
}

int Rng::categorical_from_log(std::span<const double> log_weights) {
  if (log_weights.empty())
    throw DomainError("categorical_from_log: empty weights");
  double max_lw = log_weights[0];
  for (double lw : log_weights)
    if (lw > max_lw) max_lw = lw;
  double total = 0.0;
  for (double lw : log_weights) total += std::exp(lw - max_lw);
  double u = uniform() * total;
  for (std::size_t i = 0; i + 1 < log_weights.size(); ++i) {
    u -= std::exp(log_weights[i] - max_lw);
    if (u < 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(log_weights.size() - 1);
}

int Rng::categorical(std::span<const double> weights) {
  if (weights.empty()) throw DomainError("categorical: empty weights");
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw DomainError("categorical: weights sum to zero");
  double u = uniform() * total;
  for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
    u -= weights[i];
    if (u < 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(weights.size() - 1);
}

std::string Rng::serialize() const {
  std::ostringstream oss;
  oss << engine_;
  return oss.str();
}

void Rng::deserialize(const std::string& text) {
  std::istringstream iss(text);
  iss >> engine_;
  if (iss.fail()) throw DataError("Rng::deserialize: malformed engine state");
}

std::uint64_t Rng::mix(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over seed+stream.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace geotopics
