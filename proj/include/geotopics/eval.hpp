// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "geotopics/state.hpp"

namespace geotopics {

struct HeldoutResult {
  double per_view_loglik = 0.0;      // mean log predictive per held-out view
  double per_location_loglik = 0.0;  // mean log predictive per held-out customer
  std::int64_t num_views = 0;
  int num_customers = 0;
};

/// Mixture predictive log-probability of one catalog item under the trained
/// state: clusters weighted by membership counts (plus new-cluster mass),
/// topics by the per-cluster urn weights (plus new-topic mass).
double heldout_item_log_prob(const ModelState& state, int item);

/// Same construction for a location; the new-factor component integrates the
/// concentration over its lognormal prior by quadrature.
double heldout_location_log_prob(const ModelState& state, const UnitVec3& x);

/// Held-out customers must be disjoint from training ones; every customer is
/// scored as wholly unseen.
HeldoutResult heldout_loglik(const ModelState& state, const Dataset& heldout);

/// Chance-adjusted Rand index by pair counting. Both all-singleton vs
/// all-singleton and one-block vs one-block degenerate pairs return 1.
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

/// E[f(c)] under c ~ logNormal(log_mean, log_sd), by trapezoid quadrature on
/// the latent normal axis.
double expectation_over_lognormal(double log_mean, double log_sd,
                                  const std::function<double(double)>& f);

struct TopicSummary {
  int topic = 0;
  std::int64_t views = 0;
  std::vector<std::pair<int, double>> top_items;  // (item, predictive mass), descending
};

struct LocationFactorSummary {
  int factor = 0;
  std::int64_t customers = 0;
  double concentration = 0.0;
  GeoPoint mean_direction;  // posterior mean direction
};

struct ClusterSummary {
  int cluster = 0;
  std::int64_t customers = 0;
  std::vector<std::pair<int, std::int64_t>> top_factors;  // (factor, customers)
  std::vector<std::pair<int, std::int64_t>> top_topics;   // (topic, views)
};

struct FactorReport {
  std::vector<TopicSummary> topics;
  std::vector<LocationFactorSummary> location_factors;
  std::vector<ClusterSummary> clusters;
};

struct EvalReport {
  double heldout_loglik_per_view = 0.0;
  double heldout_loglik_location = 0.0;
  double ari_cluster = 0.0;  // against ground truth, when available
  double ari_factor = 0.0;
  bool has_ari = false;
  FactorReport report;
};

FactorReport summarize(const ModelState& state, int top_k = 10);

/// Renderers. Catalog titles, when provided, annotate item ids in the text
/// and JSON forms.
std::string report_to_json(const FactorReport& report,
                           const std::vector<std::string>& titles = {});
std::string report_to_text(const FactorReport& report,
                           const std::vector<std::string>& titles = {});
std::string report_to_geojson(const FactorReport& report);
std::string eval_report_to_json(const EvalReport& report);

}  // namespace geotopics
