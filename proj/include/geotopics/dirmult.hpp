// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstdint>
#include <vector>

namespace geotopics {

/// Dirichlet pseudo-counts over a catalog of V items. gamma_sum is cached;
/// symmetric() is the common construction.
struct CatalogParams {
  int catalog_size = 0;
  std::vector<double> gamma;
  double gamma_sum = 0.0;

  static CatalogParams symmetric(int catalog_size, double gamma_value);
  static CatalogParams from_gamma(std::vector<double> gamma);
};

/// Per-topic item counts and their total.
struct TopicCounts {
  std::vector<std::int64_t> item_counts;
  std::int64_t total = 0;

  explicit TopicCounts(int catalog_size = 0) : item_counts(catalog_size, 0) {}
  bool operator==(const TopicCounts&) const = default;
};

/// Collapsed predictive log P(item | topic counts excluding this view):
///   log((n_zv + gamma_v) / (n_z_total + sum gamma)).
double predictive_log_prob(const TopicCounts& tc, int item,
                           const CatalogParams& cp);

/// Prior predictive for a brand-new topic: log(gamma_v / sum gamma).
double new_topic_log_prob(int item, const CatalogParams& cp);

/// Exact Dirichlet-multinomial log marginal of a topic's item counts,
/// via log-gamma. Used for joint scoring and as the telescoping oracle.
double log_marginal(const TopicCounts& tc, const CatalogParams& cp);

}  // namespace geotopics
