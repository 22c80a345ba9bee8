// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <string>
#include <vector>

#include "geotopics/rng.hpp"
#include "geotopics/state.hpp"
#include "geotopics/vmf.hpp"

namespace testfix {

inline geotopics::Hyperparams make_hyper(int catalog_size,
                                         double gamma = 0.5) {
  geotopics::Hyperparams hp;
  hp.catalog = geotopics::CatalogParams::symmetric(catalog_size, gamma);
  hp.location_prior.mu0 =
      geotopics::UnitVec3::from(geotopics::Vec3{0.0, 0.0, 1.0});
  hp.location_prior.c0 = 0.5;
  hp.location_prior.c_log_mean = 1.0;
  hp.location_prior.c_log_sd = 0.8;
  return hp;
}

inline geotopics::Dataset make_dataset(int n, int catalog_size,
                                       double views_mean, geotopics::Rng& rng) {
  geotopics::Dataset data;
  data.catalog_size = catalog_size;
  for (int d = 0; d < n; ++d) {
    geotopics::Customer c;
    c.id = "c" + std::to_string(d);
    c.location = geotopics::sample_uniform_sphere(rng);
    const int j = rng.poisson(views_mean);
    for (int k = 0; k < j; ++k)
      c.views.push_back(static_cast<int>(rng.uniform() * catalog_size));
    data.customers.push_back(std::move(c));
  }
  return data;
}

// Tables comparison: integer tables bitwise, direction sums within tol.
inline bool tables_close(const geotopics::CountTables& a,
                         const geotopics::CountTables& b, double tol) {
  if (a.customers_per_cluster != b.customers_per_cluster) return false;
  if (a.views_per_cluster != b.views_per_cluster) return false;
  if (a.cluster_factor != b.cluster_factor) return false;
  if (a.cluster_topic != b.cluster_topic) return false;
  if (a.customers_per_factor != b.customers_per_factor) return false;
  if (a.topic_items != b.topic_items) return false;
  if (a.factor_direction_sum.size() != b.factor_direction_sum.size())
    return false;
  for (std::size_t s = 0; s < a.factor_direction_sum.size(); ++s) {
    const geotopics::Vec3 diff =
        a.factor_direction_sum[s].value() - b.factor_direction_sum[s].value();
    if (std::abs(diff.x) > tol || std::abs(diff.y) > tol ||
        std::abs(diff.z) > tol)
      return false;
  }
  return true;
}

}  // namespace testfix
