// Apache License, Version 2.0, refer to LICENSE.txt

#include <cmath>

#include "doctest.h"
#include "geotopics/error.hpp"
#include "geotopics/state.hpp"
#include "support/fixtures.hpp"

using namespace geotopics;

namespace {

// Attach every customer: round-robin clusters/factors, topics as given.
void attach_all(ModelState& st, int clusters, int factors, int topics,
                Rng& rng) {
  for (int t = 0; t < clusters; ++t) st.create_cluster();
  for (int s = 0; s < factors; ++s) st.create_factor(1.0 + 0.1 * s, rng);
  for (int z = 0; z < topics; ++z) st.create_topic(rng);
  for (int d = 0; d < st.num_customers(); ++d) {
    st.add_customer(d, d % clusters, d % factors);
    const int n = static_cast<int>(st.data().customers[d].views.size());
    for (int j = 0; j < n; ++j) st.add_view(d, j, (d + j) % topics);
  }
}

}  // namespace

TEST_SUITE("state") {

TEST_CASE("hyperparameter validation lists all problems at once") {
  Hyperparams hp = testfix::make_hyper(4);
  hp.alpha_interaction = -1.0;
  hp.alpha_topic = 0.0;
  hp.location_prior.c0 = -2.0;
  try {
    hp.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("alpha_interaction") != std::string::npos);
    CHECK(msg.find("alpha_topic") != std::string::npos);
    CHECK(msg.find("c0") != std::string::npos);
  }
}

TEST_CASE("add then remove restores the tables") {
  Rng rng(3);
  const Dataset data = testfix::make_dataset(6, 4, 3.0, rng);
  ModelState st(&data, testfix::make_hyper(4));
  attach_all(st, 2, 2, 3, rng);
  st.audit();

  const CountTables before = st.tables();
  const int d = 1;
  const int t = st.cluster_of(d), s = st.factor_of(d);
  std::vector<int> zs;
  const int views = static_cast<int>(data.customers[d].views.size());
  for (int j = 0; j < views; ++j) zs.push_back(st.topic_of(d, j));
  for (int j = 0; j < views; ++j) st.remove_view(d, j);
  st.remove_customer(d);
  st.add_customer(d, t, s);
  for (int j = 0; j < views; ++j) st.add_view(d, j, zs[j]);
  CHECK(testfix::tables_close(before, st.tables(), 1e-12));
  st.audit();
}

TEST_CASE("view add bumps per-cluster view counts once topics attach") {
  Rng rng(17);
  Dataset data = testfix::make_dataset(1, 4, 0.0, rng);
  data.customers[0].views = {0, 1, 2};
  ModelState st(&data, testfix::make_hyper(4));
  st.create_cluster();
  st.create_factor(1.0, rng);
  st.create_topic(rng);
  st.add_customer(0, 0, 0);
  CHECK(st.tables().views_per_cluster[0] == 0);
  for (int j = 0; j < 3; ++j) st.add_view(0, j, 0);
  CHECK(st.tables().views_per_cluster[0] == 3);
  CHECK(st.tables().topic_items[0].total == 3);
}

TEST_CASE("removing the sole customer of a cluster prunes and remaps") {
  Rng rng(4);
  Dataset data = testfix::make_dataset(3, 4, 0.0, rng);
  ModelState st(&data, testfix::make_hyper(4));
  st.create_cluster();
  st.create_cluster();
  st.create_factor(1.0, rng);
  st.add_customer(0, 0, 0);  // sole member of cluster 0
  st.add_customer(1, 1, 0);
  st.add_customer(2, 1, 0);
  st.remove_customer(0);
  REQUIRE(st.num_clusters() == 1);
  // the surviving cluster was index 1 and got compacted to 0
  CHECK(st.cluster_of(1) == 0);
  CHECK(st.cluster_of(2) == 0);
  CHECK(st.tables().customers_per_cluster[0] == 2);
  st.audit();
}

TEST_CASE("factor prune folds stick mass into the remainder") {
  Rng rng(5);
  Dataset data = testfix::make_dataset(2, 4, 0.0, rng);
  ModelState st(&data, testfix::make_hyper(4));
  st.create_cluster();
  st.create_factor(1.0, rng);
  st.create_factor(2.0, rng);
  st.add_customer(0, 0, 0);
  st.add_customer(1, 0, 1);
  const double total_before = st.location_sticks().total();
  st.detach_location(0);  // factor 0 empties and dies
  CHECK(st.num_factors() == 1);
  CHECK(st.location_sticks().total() ==
        doctest::Approx(total_before).epsilon(1e-13));
  CHECK(st.concentration(0) == 2.0);  // the survivor's c moved down
  CHECK(st.factor_of(1) == 0);
  st.attach_location(0, 0);
  st.audit();
}

TEST_CASE("topic prune rewrites view assignments") {
  Rng rng(6);
  Dataset data = testfix::make_dataset(2, 4, 0.0, rng);
  data.customers[0].views = {1, 2};
  data.customers[1].views = {3};
  ModelState st(&data, testfix::make_hyper(4));
  st.create_cluster();
  st.create_factor(1.0, rng);
  st.create_topic(rng);
  st.create_topic(rng);
  st.add_customer(0, 0, 0);
  st.add_customer(1, 0, 0);
  st.add_view(0, 0, 0);
  st.add_view(0, 1, 1);
  st.add_view(1, 0, 1);
  st.remove_view(0, 0);  // topic 0 empties; topic 1 compacts to slot 0
  CHECK(st.num_topics() == 1);
  CHECK(st.topic_of(0, 1) == 0);
  CHECK(st.topic_of(1, 0) == 0);
  st.audit();
}

TEST_CASE("guards catch misuse") {
  Rng rng(7);
  Dataset data = testfix::make_dataset(2, 4, 2.0, rng);
  ModelState st(&data, testfix::make_hyper(4));
  st.create_cluster();
  st.create_factor(1.0, rng);
  CHECK_THROWS_AS(st.remove_customer(0), StateCorruptionError);
  st.add_customer(0, 0, 0);
  CHECK_THROWS_AS(st.add_customer(0, 0, 0), StateCorruptionError);
  CHECK_THROWS_AS(st.add_customer(1, 5, 0), StateCorruptionError);
  st.detach_views_from_cluster(0);
  CHECK_THROWS_AS(st.detach_views_from_cluster(0), StateCorruptionError);
  st.attach_views_to_cluster(0);
  if (!data.customers[0].views.empty()) {
    st.add_view(0, 0, st.create_topic(rng));
    // removing the customer while a view still sits in the cluster tables
    CHECK_THROWS_AS(st.remove_customer(0), StateCorruptionError);
    st.remove_view(0, 0);
    st.remove_customer(0);
    CHECK_FALSE(st.customer_attached(0));
  }
}

TEST_CASE("CRT table-count draws") {
  Rng rng(8);
  CHECK(sample_table_count(0, 1.0, rng) == 0);
  for (int i = 0; i < 50; ++i) CHECK(sample_table_count(1, 0.37, rng) == 1);

  // E[m] for n = 3, mass = 1 is 1 + 1/2 + 1/3 = 11/6; three Bernoulli terms
  // give the variance for the 3-sigma band.
  const int reps = 100000;
  double sum = 0.0;
  for (int i = 0; i < reps; ++i) sum += sample_table_count(3, 1.0, rng);
  const double mean = sum / reps;
  const double var = 0.0 + 0.25 + 2.0 / 9.0;
  const double sigma = std::sqrt(var / reps);
  CHECK(std::abs(mean - 11.0 / 6.0) <= 3.0 * sigma);
}

TEST_CASE("resample_sticks on empty and tiny problems") {
  Rng rng(9);
  const GlobalSticks empty = resample_sticks({}, {}, 2.0, rng);
  CHECK(empty.weights.empty());
  CHECK(empty.remainder == 1.0);

  const GlobalSticks zeros = resample_sticks({{0}, {0}}, {0.5}, 2.0, rng);
  CHECK(zeros.weights.empty());
  CHECK(zeros.remainder == 1.0);

  // Single factor, single group, n = 1: sticks ~ Dirichlet(1, alpha0);
  // the factor weight has mean 1/(1+alpha0).
  const double alpha0 = 3.0;
  const int reps = 100000;
  double sum = 0.0;
  for (int i = 0; i < reps; ++i) {
    const GlobalSticks gs = resample_sticks({{1}}, {0.7}, alpha0, rng);
    REQUIRE(gs.weights.size() == 1);
    CHECK(std::abs(gs.total() - 1.0) <= 1e-12);
    sum += gs.weights[0];
  }
  const double mean = sum / reps;
  const double want = 1.0 / (1.0 + alpha0);
  const double var = alpha0 / ((1.0 + alpha0) * (1.0 + alpha0) * (2.0 + alpha0));
  CHECK(std::abs(mean - want) <= 3.0 * std::sqrt(var / reps));
}

TEST_CASE("sticks sum to one after every resample") {
  Rng rng(10);
  const Dataset data = testfix::make_dataset(20, 5, 4.0, rng);
  ModelState st(&data, testfix::make_hyper(5));
  attach_all(st, 3, 4, 3, rng);
  for (int rep = 0; rep < 200; ++rep) {
    st.resample_location_sticks(rng);
    st.resample_topic_sticks(rng);
    CHECK(std::abs(st.location_sticks().total() - 1.0) <= 1e-12);
    CHECK(std::abs(st.topic_sticks().total() - 1.0) <= 1e-12);
  }
  st.audit();
}

TEST_CASE("random op sequences keep tables equal to recomputation") {
  Rng rng(11);
  const Dataset data = testfix::make_dataset(30, 6, 3.0, rng);
  ModelState st(&data, testfix::make_hyper(6));
  attach_all(st, 3, 3, 4, rng);
  st.audit();

  for (int op = 0; op < 20000; ++op) {
    const int d = static_cast<int>(rng.uniform() * st.num_customers());
    const double which = rng.uniform();
    if (which < 0.35) {
      // full customer move
      const int views = static_cast<int>(data.customers[d].views.size());
      std::vector<int> zs;
      for (int j = 0; j < views; ++j) zs.push_back(st.topic_of(d, j));
      st.detach_views_from_cluster(d);
      st.remove_customer(d);
      int t = static_cast<int>(rng.uniform() * (st.num_clusters() + 1));
      if (t == st.num_clusters()) t = st.create_cluster();
      st.add_customer(d, t, rng.uniform() < 0.5
                                ? static_cast<int>(rng.uniform() * st.num_factors())
                                : st.create_factor(rng.uniform(0.5, 3.0), rng));
      st.attach_views_to_cluster(d);
    } else if (which < 0.6) {
      // factor move
      st.detach_location(d);
      int s = static_cast<int>(rng.uniform() * (st.num_factors() + 1));
      if (s == st.num_factors()) s = st.create_factor(rng.uniform(0.5, 3.0), rng);
      st.attach_location(d, s);
    } else if (!data.customers[d].views.empty()) {
      // view move
      const int j = static_cast<int>(rng.uniform() * data.customers[d].views.size());
      st.remove_view(d, j);
      int z = static_cast<int>(rng.uniform() * (st.num_topics() + 1));
      if (z == st.num_topics()) z = st.create_topic(rng);
      st.add_view(d, j, z);
    }
    if (op % 500 == 0) st.audit();
  }
  st.audit();
}

TEST_CASE("empty view histories are legal") {
  Rng rng(12);
  Dataset data = testfix::make_dataset(3, 4, 0.0, rng);
  for (auto& c : data.customers) c.views.clear();
  ModelState st(&data, testfix::make_hyper(4));
  st.create_cluster();
  st.create_factor(1.0, rng);
  for (int d = 0; d < 3; ++d) st.add_customer(d, 0, 0);
  st.audit();
  CHECK(st.num_topics() == 0);
  CHECK(st.tables().views_per_cluster[0] == 0);
}

TEST_CASE("load_assignments rebuilds a consistent state") {
  Rng rng(13);
  const Dataset data = testfix::make_dataset(8, 4, 2.0, rng);
  ModelState reference(&data, testfix::make_hyper(4));
  attach_all(reference, 2, 3, 2, rng);

  ModelState st(&data, testfix::make_hyper(4));
  st.load_assignments(reference.cluster_assignments(),
                      reference.factor_assignments(),
                      reference.topic_assignments(),
                      reference.concentrations());
  st.audit();
  CHECK(testfix::tables_close(reference.tables(), st.tables(), 1e-12));
}

}  // TEST_SUITE
