// Apache License, Version 2.0, refer to LICENSE.txt

#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "geotopics/dirmult.hpp"
#include "geotopics/error.hpp"
#include "geotopics/rng.hpp"

using namespace geotopics;

namespace {
double sequential_log_prob(const std::vector<int>& items,
                           const CatalogParams& cp) {
  TopicCounts tc(cp.catalog_size);
  double total = 0.0;
  for (int v : items) {
    total += predictive_log_prob(tc, v, cp);
    ++tc.item_counts[v];
    ++tc.total;
  }
  return total;
}
}  // namespace

TEST_SUITE("dirmult") {

TEST_CASE("predictive on empty counts is the prior predictive") {
  const CatalogParams cp = CatalogParams::symmetric(5, 0.1);
  TopicCounts tc(5);
  CHECK(predictive_log_prob(tc, 2, cp) ==
        doctest::Approx(std::log(0.2)).epsilon(1e-13));
  CHECK(new_topic_log_prob(2, cp) ==
        doctest::Approx(std::log(0.2)).epsilon(1e-13));
}

TEST_CASE("predictive with counts, hand-evaluated") {
  // n_zv = 3, total = 10, gamma_v = 1, sum gamma = 5 -> 4/15.
  const CatalogParams cp = CatalogParams::symmetric(5, 1.0);
  TopicCounts tc(5);
  tc.item_counts = {3, 4, 1, 2, 0};
  tc.total = 10;
  CHECK(predictive_log_prob(tc, 0, cp) ==
        doctest::Approx(std::log(4.0 / 15.0)).epsilon(1e-13));
}

TEST_CASE("new_topic_log_prob asymmetric, hand-evaluated") {
  const CatalogParams cp = CatalogParams::from_gamma({1.0, 2.0, 3.0});
  CHECK(new_topic_log_prob(2, cp) == doctest::Approx(std::log(0.5)).epsilon(1e-13));
  const CatalogParams sym = CatalogParams::symmetric(7, 0.3);
  for (int v = 0; v < 7; ++v)
    CHECK(new_topic_log_prob(v, sym) ==
          doctest::Approx(std::log(1.0 / 7.0)).epsilon(1e-13));
}

TEST_CASE("predictive probabilities sum to 1") {
  const CatalogParams cp = CatalogParams::from_gamma({0.2, 1.5, 0.7, 2.0});
  Rng rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    TopicCounts tc(4);
    for (int v = 0; v < 4; ++v) {
      tc.item_counts[v] = static_cast<std::int64_t>(rng.uniform() * 20);
      tc.total += tc.item_counts[v];
    }
    double total = 0.0;
    for (int v = 0; v < 4; ++v) total += std::exp(predictive_log_prob(tc, v, cp));
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("out-of-range items are rejected") {
  const CatalogParams cp = CatalogParams::symmetric(3, 1.0);
  TopicCounts tc(3);
  CHECK_THROWS_AS(predictive_log_prob(tc, 3, cp), InvalidItemError);
  CHECK_THROWS_AS(predictive_log_prob(tc, -1, cp), InvalidItemError);
  CHECK_THROWS_AS(new_topic_log_prob(9, cp), InvalidItemError);
}

TEST_CASE("exchangeability over exhaustive permutations") {
  const CatalogParams cp = CatalogParams::from_gamma({0.4, 1.1, 0.6, 0.9});
  std::vector<int> items{0, 2, 2, 1, 3, 0, 2, 1};
  const double reference = sequential_log_prob(items, cp);
  std::vector<int> perm = items;
  std::sort(perm.begin(), perm.end());
  int checked = 0;
  do {
    CHECK(sequential_log_prob(perm, cp) ==
          doctest::Approx(reference).epsilon(1e-11));
    ++checked;
  } while (std::next_permutation(perm.begin(), perm.end()));
  CHECK(checked > 100);  // 8 items with repeats still give many orders
}

TEST_CASE("sequential product equals the log-gamma marginal") {
  const CatalogParams cp = CatalogParams::from_gamma({0.25, 0.5, 1.25});
  Rng rng(11);
  for (int rep = 0; rep < 100; ++rep) {
    const int len = static_cast<int>(rng.uniform() * 12);
    std::vector<int> items(len);
    TopicCounts tc(3);
    for (int& v : items) {
      v = static_cast<int>(rng.uniform() * 3);
      ++tc.item_counts[v];
      ++tc.total;
    }
    CHECK(sequential_log_prob(items, cp) ==
          doctest::Approx(log_marginal(tc, cp)).epsilon(1e-10));
  }
}

}  // TEST_SUITE
