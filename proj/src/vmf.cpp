// Apache License, Version 2.0, refer to LICENSE.txt

#include "geotopics/vmf.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "geotopics/error.hpp"

namespace geotopics {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLog2 = std::numbers::ln2;
constexpr double kInf = std::numeric_limits<double>::infinity();

// log(sinh x) without overflow: x + log1p(-e^{-2x}) - log 2.
double log_sinh(double x) {
  if (x == 0.0) return -kInf;
  if (x < 20.0) return std::log(std::sinh(x));
  return x + std::log1p(-std::exp(-2.0 * x)) - kLog2;
}

// log(sinh(x)/x); -> 0 as x -> 0.
double log_sinh_over_x(double x) {
  if (x < 1e-4) {
    const double x2 = x * x;
    // sinh(x)/x = 1 + x^2/6 + x^4/120 + ...
    return std::log1p(x2 / 6.0 * (1.0 + x2 / 20.0));
  }
  return log_sinh(x) - std::log(x);
}

// log(cosh x - sinh x / x); -> log(x^2/3 + x^4/30 + x^6/840) for small x.
double log_cosh_minus_sinhx(double x) {
  if (x == 0.0) return -kInf;
  if (x < 1e-2) {
    const double x2 = x * x;
    return std::log(x2 / 3.0 * (1.0 + x2 / 10.0 * (1.0 + x2 / 28.0)));
  }
  if (x < 20.0) return std::log(std::cosh(x) - std::sinh(x) / x);
  // ((1 - 1/x) e^x + (1 + 1/x) e^{-x}) / 2
  return x - kLog2 + std::log1p(-1.0 / x + (1.0 + 1.0 / x) * std::exp(-2.0 * x));
}

// Ascending series sum_k (x/2)^{2k+nu} / (k! Gamma(k+nu+1)), accumulated in
// log space. All terms are positive so a running log-sum-exp is stable.
double log_bessel_series(double nu, double x) {
  const double log_half_x = std::log(0.5 * x);
  double log_term = nu * log_half_x - std::lgamma(nu + 1.0);
  double log_sum = log_term;
  for (int k = 1; k < 20000; ++k) {
    log_term += 2.0 * log_half_x - std::log(static_cast<double>(k)) -
                std::log(nu + k);
    if (log_term > log_sum)
      log_sum = log_term + std::log1p(std::exp(log_sum - log_term));
    else
      log_sum += std::log1p(std::exp(log_term - log_sum));
    if (log_term < log_sum - 40.0 && k > x) break;
  }
  return log_sum;
}

}  // namespace

double log_bessel_i(double nu, double x) {
  if (x < 0.0) throw DomainError("log_bessel_i: x must be >= 0");
  if (nu < 0.0) throw DomainError("log_bessel_i: nu must be >= 0");
  if (x == 0.0) return nu == 0.0 ? 0.0 : -kInf;
  const double log_pref = 0.5 * (kLog2 - std::log(kPi * x));
  if (nu == 0.5) return log_pref + log_sinh(x);
  if (nu == 1.5) return log_pref + log_cosh_minus_sinhx(x);
  return log_bessel_series(nu, x);
}

double log_norm_const(int dim, double c) {
  if (dim != 3)
    throw UnsupportedDimensionError("log_norm_const: only D = 3 is supported, got " +
                                    std::to_string(dim));
  if (c < 0.0) throw DomainError("log_norm_const: c must be >= 0");
  // log( c / (4 pi sinh c) ) = -log(4 pi) - log(sinh(c)/c); exact uniform
  // limit at c = 0.
  return -std::log(4.0 * kPi) - log_sinh_over_x(c);
}

double log_density(const UnitVec3& x, const VmfParams& p) {
  return log_norm_const(3, p.c) + p.c * p.mu.dot(x);
}

void tangent_basis(const UnitVec3& v, Vec3& e1, Vec3& e2) {
  const Vec3& m = v.vec();
  // Cross against the axis m is least aligned with.
  Vec3 a{1.0, 0.0, 0.0};
  if (std::abs(m.y) <= std::abs(m.x) && std::abs(m.y) <= std::abs(m.z))
    a = Vec3{0.0, 1.0, 0.0};
  else if (std::abs(m.z) <= std::abs(m.x) && std::abs(m.z) <= std::abs(m.y))
    a = Vec3{0.0, 0.0, 1.0};
  e1 = m.cross(a);
  e1 = e1 * (1.0 / e1.norm());
  e2 = m.cross(e1);
}

UnitVec3 sample_vmf(const VmfParams& p, Rng& rng) {
  if (!(p.c > 0.0)) throw DomainError("sample_vmf: c must be > 0");
  const double c = p.c;
  // Wood (1994), "Simulation of the von Mises Fisher distribution",
  // specialized to m = 3 where Beta(1, 1) is uniform.
  const double b = std::sqrt(c * c + 1.0) - c;
  const double x0 = (1.0 - b) / (1.0 + b);
  const double log_env = c * x0 + 2.0 * std::log1p(-x0 * x0);
  double w;
  for (;;) {
    const double zu = rng.uniform();
    const double u = rng.uniform_pos();
    w = (1.0 - (1.0 + b) * zu) / (1.0 - (1.0 - b) * zu);
    if (c * w + 2.0 * std::log1p(-x0 * w) - log_env >= std::log(u)) break;
  }
  Vec3 e1, e2;
  tangent_basis(p.mu, e1, e2);
  const double theta = 2.0 * kPi * rng.uniform();
  const double r = std::sqrt(std::max(0.0, 1.0 - w * w));
  const Vec3 x = p.mu.vec() * w + e1 * (r * std::cos(theta)) +
                 e2 * (r * std::sin(theta));
  return UnitVec3::from(x);
}

double log_marginal(const Vec3& sum_vec, long long n, double c,
                    const VmfPrior& prior) {
  if (n == 0) return 0.0;
  const Vec3 post = sum_vec * c + prior.mu0.vec() * prior.c0;
  return static_cast<double>(n) * log_norm_const(3, c) +
         log_norm_const(3, prior.c0) - log_norm_const(3, post.norm());
}

double predictive_log_prob(const UnitVec3& x, const Vec3& sum_vec_excl,
                           double c, const VmfPrior& prior) {
  const Vec3 base = sum_vec_excl * c + prior.mu0.vec() * prior.c0;
  const Vec3 with_x = base + x.vec() * c;
  return log_norm_const(3, c) + log_norm_const(3, base.norm()) -
         log_norm_const(3, with_x.norm());
}

double mean_resultant_length(double c) {
  if (c == 0.0) return 0.0;
  if (c < 1e-4) return c / 3.0 - c * c * c / 45.0;
  if (c > 20.0) return 1.0 / std::tanh(c) - 1.0 / c;
  return std::cosh(c) / std::sinh(c) - 1.0 / c;
}

double log_lognormal_pdf(double c, double log_mean, double log_sd) {
  if (!(c > 0.0)) return -kInf;
  const double z = (std::log(c) - log_mean) / log_sd;
  return -0.5 * z * z - std::log(c) - std::log(log_sd) -
         0.5 * std::log(2.0 * kPi);
}

UnitVec3 sample_uniform_sphere(Rng& rng) {
  const double z = rng.uniform(-1.0, 1.0);
  const double theta = 2.0 * kPi * rng.uniform();
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return UnitVec3::from(Vec3{r * std::cos(theta), r * std::sin(theta), z});
}

}  // namespace geotopics
