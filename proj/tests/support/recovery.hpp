// Apache License, Version 2.0, refer to LICENSE.txt
//
// Scripted well-separated ground truth for the recovery and parallel
// fidelity checks: three tight location factors on orthogonal axes and four
// topics with disjoint item support.

#pragma once

#include <string>
#include <vector>

#include "geotopics/state.hpp"
#include "geotopics/vmf.hpp"

namespace testrecovery {

struct RecoveryTruth {
  geotopics::Dataset data;
  std::vector<int> factor;              // per customer
  std::vector<std::vector<int>> topic;  // per view
};

inline RecoveryTruth make_recovery_data(int n, std::uint64_t seed,
                                        const std::string& id_prefix = "r") {
  using namespace geotopics;
  constexpr int kItemsPerTopic = 10;
  constexpr int kTopics = 4;
  const double kConcentration = 50.0;
  const UnitVec3 axes[3] = {UnitVec3::from(Vec3{0.0, 0.0, 1.0}),
                            UnitVec3::from(Vec3{1.0, 0.0, 0.0}),
                            UnitVec3::from(Vec3{0.0, 1.0, 0.0})};
  // One interaction cluster per location factor; each mixes all four topics
  // with its own weights.
  const double topic_mix[3][kTopics] = {{0.4, 0.3, 0.2, 0.1},
                                        {0.1, 0.4, 0.3, 0.2},
                                        {0.2, 0.1, 0.4, 0.3}};
  Rng rng(seed);
  RecoveryTruth out;
  out.data.catalog_size = kItemsPerTopic * kTopics;
  for (int d = 0; d < n; ++d) {
    const int cluster = d % 3;
    Customer cust;
    cust.id = id_prefix + std::to_string(d);
    cust.location = sample_vmf({axes[cluster], kConcentration}, rng);
    const int views = rng.poisson(20.0);
    std::vector<int> zs(views);
    cust.views.resize(views);
    for (int j = 0; j < views; ++j) {
      const std::vector<double> mix(topic_mix[cluster],
                                    topic_mix[cluster] + kTopics);
      zs[j] = rng.categorical(mix);
      cust.views[j] =
          zs[j] * kItemsPerTopic + static_cast<int>(rng.uniform() * kItemsPerTopic);
    }
    out.data.customers.push_back(std::move(cust));
    out.factor.push_back(cluster);
    out.topic.push_back(std::move(zs));
  }
  return out;
}

inline geotopics::Hyperparams recovery_hyper() {
  geotopics::Hyperparams hp;
  hp.catalog = geotopics::CatalogParams::symmetric(40, 0.1);
  hp.location_prior.mu0 =
      geotopics::UnitVec3::from(geotopics::Vec3{1.0, 0.0, 0.0});
  hp.location_prior.c0 = 0.01;
  hp.location_prior.c_log_mean = std::log(10.0);
  hp.location_prior.c_log_sd = 1.0;
  return hp;
}

inline std::vector<int> flatten(const std::vector<std::vector<int>>& nested) {
  std::vector<int> flat;
  for (const auto& row : nested) flat.insert(flat.end(), row.begin(), row.end());
  return flat;
}

}  // namespace testrecovery
