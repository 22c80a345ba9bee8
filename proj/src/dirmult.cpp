// Apache License, Version 2.0, refer to LICENSE.txt

#include "geotopics/dirmult.hpp"

#include <cmath>
#include <string>

#include "geotopics/error.hpp"

namespace geotopics {

CatalogParams CatalogParams::symmetric(int catalog_size, double gamma_value) {
  if (catalog_size < 1) throw ConfigError("catalog: V must be >= 1");
  if (!(gamma_value > 0.0)) throw ConfigError("catalog: gamma must be > 0");
  CatalogParams cp;
  cp.catalog_size = catalog_size;
  cp.gamma.assign(catalog_size, gamma_value);
  cp.gamma_sum = gamma_value * catalog_size;
  return cp;
}

CatalogParams CatalogParams::from_gamma(std::vector<double> gamma) {
  if (gamma.empty()) throw ConfigError("catalog: V must be >= 1");
  CatalogParams cp;
  cp.catalog_size = static_cast<int>(gamma.size());
  cp.gamma_sum = 0.0;
  for (double g : gamma) {
    if (!(g > 0.0)) throw ConfigError("catalog: all gamma_v must be > 0");
    cp.gamma_sum += g;
  }
  cp.gamma = std::move(gamma);
  return cp;
}

namespace {
void check_item(int item, const CatalogParams& cp) {
  if (item < 0 || item >= cp.catalog_size)
    throw InvalidItemError("item index " + std::to_string(item) +
                           " outside catalog of size " +
                           std::to_string(cp.catalog_size));
}
}  // namespace

double predictive_log_prob(const TopicCounts& tc, int item,
                           const CatalogParams& cp) {
  check_item(item, cp);
  return std::log(static_cast<double>(tc.item_counts[item]) + cp.gamma[item]) -
         std::log(static_cast<double>(tc.total) + cp.gamma_sum);
}

double new_topic_log_prob(int item, const CatalogParams& cp) {
  check_item(item, cp);
  return std::log(cp.gamma[item]) - std::log(cp.gamma_sum);
}

double log_marginal(const TopicCounts& tc, const CatalogParams& cp) {
  double out = std::lgamma(cp.gamma_sum) -
               std::lgamma(cp.gamma_sum + static_cast<double>(tc.total));
  for (int v = 0; v < cp.catalog_size; ++v) {
    if (tc.item_counts[v] != 0)
      out += std::lgamma(cp.gamma[v] + static_cast<double>(tc.item_counts[v])) -
             std::lgamma(cp.gamma[v]);
  }
  return out;
}

}  // namespace geotopics
