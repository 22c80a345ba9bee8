// Apache License, Version 2.0, refer to LICENSE.txt

#include <cmath>

#include "doctest.h"
#include "geotopics/error.hpp"
#include "geotopics/vmf.hpp"
#include "support/stats.hpp"

using namespace geotopics;

namespace {
const UnitVec3 kXAxis = UnitVec3::from(Vec3{1.0, 0.0, 0.0});
const UnitVec3 kZAxis = UnitVec3::from(Vec3{0.0, 0.0, 1.0});

// Independent oracle: log C_3(c) via long double sinh, valid up to the
// long-double overflow point (~e^11000), far past everything we test.
long double log_c3_oracle(long double c) {
  if (c == 0.0L) return std::log(1.0L / (4.0L * 3.14159265358979323846264338328L));
  return std::log(c) - std::log(4.0L * 3.14159265358979323846264338328L) -
         std::log(std::sinh(c));
}

// Independent oracle: ascending Bessel series in long double,
// I_nu(x) = sum_k (x/2)^{2k+nu} / (k! Gamma(k+nu+1)).
double bessel_series_oracle(double nu, double x) {
  const long double half = 0.5L * static_cast<long double>(x);
  long double term = std::pow(half, static_cast<long double>(nu)) /
                     std::tgamma(static_cast<long double>(nu) + 1.0L);
  long double sum = term;
  for (int k = 1; k < 2000; ++k) {
    term *= half * half / (static_cast<long double>(k) * (nu + k));
    sum += term;
    if (term < sum * 1e-22L) break;
  }
  return static_cast<double>(std::log(sum));
}
}  // namespace

TEST_SUITE("vmf") {

TEST_CASE("log_bessel_i half-integer closed forms") {
  // sqrt(2/pi) sinh(1) evaluated independently (mpmath cross-check).
  CHECK(log_bessel_i(0.5, 1.0) ==
        doctest::Approx(-0.064351991073531799).epsilon(1e-12));
  // Large argument: sinh x ~ e^x / 2, no overflow allowed.
  const double big = log_bessel_i(0.5, 700.0);
  const double asym = 700.0 + std::log(std::sqrt(2.0 / (M_PI * 700.0)) / 2.0);
  CHECK(std::isfinite(big));
  CHECK(big == doctest::Approx(asym).epsilon(1e-9));
  // I_{3/2} vanishes at 0+ and decreases monotonically toward -inf.
  double prev = log_bessel_i(1.5, 1e-2);
  for (double x : {1e-3, 1e-4, 1e-5, 1e-6}) {
    const double cur = log_bessel_i(1.5, x);
    CHECK(cur < prev);
    prev = cur;
  }
  CHECK(log_bessel_i(1.5, 0.0) == -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(log_bessel_i(0.5, -1.0), DomainError);
}

TEST_CASE("log_bessel_i closed forms agree with an independent series") {
  for (double x : {1e-6, 0.03, 0.7, 3.0, 12.0, 45.0, 250.0}) {
    CHECK(log_bessel_i(0.5, x) ==
          doctest::Approx(bessel_series_oracle(0.5, x)).epsilon(1e-11));
    CHECK(log_bessel_i(1.5, x) ==
          doctest::Approx(bessel_series_oracle(1.5, x)).epsilon(1e-11));
  }
  // The generic fallback handles other orders; I_1(2) = 1.590636854637329.
  CHECK(log_bessel_i(1.0, 2.0) ==
        doctest::Approx(std::log(1.590636854637329)).epsilon(1e-10));
  CHECK(log_bessel_i(0.0, 0.0) == 0.0);
  CHECK(log_bessel_i(2.5, 37.0) ==
        doctest::Approx(bessel_series_oracle(2.5, 37.0)).epsilon(1e-10));
}

TEST_CASE("log_norm_const matches the closed form and its limits") {
  CHECK(log_norm_const(3, 0.0) ==
        doctest::Approx(std::log(1.0 / (4.0 * M_PI))).epsilon(1e-14));
  // Frozen values computed with 30-digit arithmetic.
  CHECK(log_norm_const(3, 1.0) ==
        doctest::Approx(-2.6924636085404864).epsilon(1e-12));
  CHECK(log_norm_const(3, 10.0) ==
        doctest::Approx(-9.5352919713541462).epsilon(1e-12));
  for (double c : {1e-6, 1e-3, 0.1, 1.0, 10.0, 100.0, 700.0, 5000.0}) {
    const double got = log_norm_const(3, c);
    const double want = static_cast<double>(log_c3_oracle(c));
    CHECK(got == doctest::Approx(want).epsilon(1e-10));
  }
  CHECK_THROWS_AS(log_norm_const(2, 1.0), UnsupportedDimensionError);
  CHECK_THROWS_AS(log_norm_const(3, -0.5), DomainError);
}

TEST_CASE("log_norm_const strictly decreases in c") {
  double prev = log_norm_const(3, 1e-8);
  for (double c = 1e-4; c < 300.0; c *= 1.7) {
    const double cur = log_norm_const(3, c);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("log_density basics") {
  CHECK(log_density(kXAxis, {kXAxis, 0.0}) ==
        doctest::Approx(std::log(1.0 / (4.0 * M_PI))));
  CHECK(log_density(kXAxis, {kXAxis, 1.0}) ==
        doctest::Approx(-2.6924636085404864 + 1.0).epsilon(1e-12));
  // Perpendicular direction: the exponent vanishes.
  CHECK(log_density(kZAxis, {kXAxis, 5.0}) ==
        doctest::Approx(log_norm_const(3, 5.0)).epsilon(1e-12));
}

TEST_CASE("density integrates to 1 over the sphere") {
  for (double c : {0.1, 1.0, 10.0, 100.0}) {
    const VmfParams p{UnitVec3::from(Vec3{0.48, -0.6, 0.64}), c};
    const double integral = teststats::sphere_integral(
        [&](double x, double y, double z) {
          return std::exp(log_density(UnitVec3::from(Vec3{x, y, z}), p));
        },
        c >= 100.0 ? 8193 : 2049, 256);
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("sample_vmf moments match directional-statistics identities") {
  Rng rng(2024);
  const UnitVec3 mu = UnitVec3::from(Vec3{0.6, 0.48, 0.64});

  SUBCASE("high concentration aligns with mu") {
    Vec3 mean{};
    const int n = 100000;
    for (int i = 0; i < n; ++i) mean += sample_vmf({mu, 10.0}, rng).vec();
    mean = mean * (1.0 / n);
    CHECK(mean.dot(mu.vec()) / mean.norm() >= 0.999);
  }

  SUBCASE("mean resultant length matches A_3(c) within 3 sigma") {
    for (double c : {0.5, 2.0, 10.0, 50.0}) {
      const int n = 100000;
      Vec3 mean{};
      double sum_t = 0.0, sum_t2 = 0.0;
      for (int i = 0; i < n; ++i) {
        const Vec3 x = sample_vmf({mu, c}, rng).vec();
        mean += x;
        const double t = x.dot(mu.vec());
        sum_t += t;
        sum_t2 += t * t;
      }
      mean = mean * (1.0 / n);
      const double want = mean_resultant_length(c);
      const double var_t = sum_t2 / n - (sum_t / n) * (sum_t / n);
      const double sigma = std::sqrt(var_t / n) + 10.0 / n;
      CHECK(std::abs(mean.norm() - want) <= 3.0 * sigma + 1e-4);
    }
    // A_3(2) value frozen from coth(2) - 1/2.
    CHECK(mean_resultant_length(2.0) ==
          doctest::Approx(0.5373147207275481).epsilon(1e-12));
  }

  SUBCASE("near-uniform limit has tiny resultant") {
    Vec3 mean{};
    const int n = 100000;
    for (int i = 0; i < n; ++i) mean += sample_vmf({mu, 1e-6}, rng).vec();
    mean = mean * (1.0 / n);
    CHECK(mean.norm() <= 0.01);
    // Rayleigh statistic 3 n |mean|^2 ~ chi^2_3 under uniformity.
    const double stat = 3.0 * n * mean.dot(mean);
    CHECK(teststats::gamma_q(1.5, 0.5 * stat) > 1e-4);
  }
}

TEST_CASE("log_marginal basics and quadrature cross-check") {
  const VmfPrior prior{kZAxis, 1.0, 0.0, 1.0};
  CHECK(log_marginal(Vec3{}, 0, 1.0, prior) == 0.0);
  // Single point at mu0 with c = c0 = 1; cross-checked by 2-D quadrature
  // marginalizing the mean direction (frozen from mpmath).
  CHECK(log_marginal(kZAxis.vec(), 1, 1.0, prior) ==
        doctest::Approx(-2.2586827780574592).epsilon(1e-12));
  const double direct = 2.0 * log_norm_const(3, 1.0) - log_norm_const(3, 2.0);
  CHECK(log_marginal(kZAxis.vec(), 1, 1.0, prior) ==
        doctest::Approx(direct).epsilon(1e-13));
}

TEST_CASE("predictive telescopes the marginal") {
  const VmfPrior prior{UnitVec3::from(Vec3{0.0, 0.6, 0.8}), 0.7, 0.3, 0.9};
  Rng rng(7);
  for (int rep = 0; rep < 200; ++rep) {
    const double c = rng.uniform(0.05, 30.0);
    const int n = 1 + static_cast<int>(rng.uniform() * 20);
    Vec3 sum{};
    UnitVec3 last = sample_uniform_sphere(rng);
    for (int i = 0; i < n; ++i) {
      last = sample_uniform_sphere(rng);
      if (i + 1 < n) sum += last.vec();
    }
    const double incl = log_marginal(sum + last.vec(), n, c, prior);
    const double excl = log_marginal(sum, n - 1, c, prior);
    const double pred = predictive_log_prob(last, sum, c, prior);
    CHECK(incl - excl == doctest::Approx(pred).epsilon(1e-10));
  }
}

TEST_CASE("predictive limits") {
  const VmfPrior prior{kZAxis, 2.0, 0.0, 1.0};
  // Empty cluster reduces to the fresh-factor form.
  const UnitVec3 x = UnitVec3::from(Vec3{0.6, 0.0, 0.8});
  const double empty = predictive_log_prob(x, Vec3{}, 3.0, prior);
  const double fresh = log_norm_const(3, 3.0) + log_norm_const(3, 2.0) -
                       log_norm_const(3, (x.vec() * 3.0 + kZAxis.vec() * 2.0).norm());
  CHECK(empty == doctest::Approx(fresh).epsilon(1e-13));
  // c -> 0 gives the uniform density regardless of cluster contents.
  const double uniform = predictive_log_prob(x, Vec3{5.0, -2.0, 1.0}, 1e-14, prior);
  CHECK(uniform == doctest::Approx(std::log(1.0 / (4.0 * M_PI))).epsilon(1e-9));
}

TEST_CASE("lognormal pdf sanity") {
  // Standard lognormal at c = 1: density 1/sqrt(2 pi).
  CHECK(log_lognormal_pdf(1.0, 0.0, 1.0) ==
        doctest::Approx(-0.5 * std::log(2.0 * M_PI)).epsilon(1e-13));
  CHECK(log_lognormal_pdf(-1.0, 0.0, 1.0) ==
        -std::numeric_limits<double>::infinity());
}

}  // TEST_SUITE
