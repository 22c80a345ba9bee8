// Apache License, Version 2.0, refer to LICENSE.txt

#include "geotopics/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "geotopics/error.hpp"
#include "json.hpp"

namespace geotopics {

namespace {

// Cluster mixture weights: counts over N + alpha, final entry = new cluster.
std::vector<double> cluster_mixture_weights(const ModelState& state) {
  const auto& tb = state.tables();
  const double alpha = state.hyper().alpha_interaction;
  double n = 0.0;
  for (std::int64_t c : tb.customers_per_cluster) n += static_cast<double>(c);
  std::vector<double> w(state.num_clusters() + 1);
  for (int t = 0; t < state.num_clusters(); ++t)
    w[t] = static_cast<double>(tb.customers_per_cluster[t]) / (n + alpha);
  w[state.num_clusters()] = alpha / (n + alpha);
  return w;
}

}  // namespace

double expectation_over_lognormal(double log_mean, double log_sd,
                                  const std::function<double(double)>& f) {
  // Trapezoid on the latent normal axis over +-8 sd; the integrand decays
  // like exp(-z^2/2) so this is accurate far beyond what the callers need.
  constexpr int kPoints = 321;
  constexpr double kSpan = 8.0;
  const double h = 2.0 * kSpan / (kPoints - 1);
  double acc = 0.0;
  for (int i = 0; i < kPoints; ++i) {
    const double z = -kSpan + i * h;
    const double weight = (i == 0 || i == kPoints - 1) ? 0.5 : 1.0;
    const double phi = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    acc += weight * f(std::exp(log_mean + log_sd * z)) * phi;
  }
  return acc * h;
}

double heldout_item_log_prob(const ModelState& state, int item) {
  const auto& hp = state.hyper();
  if (item < 0 || item >= hp.catalog.catalog_size)
    throw InvalidItemError("held-out item " + std::to_string(item) +
                           " outside catalog");
  const auto& tb = state.tables();
  const auto& pi0 = state.topic_sticks();
  const std::vector<double> w = cluster_mixture_weights(state);

  // Per-topic predictive densities are cluster-independent; cache them.
  std::vector<double> topic_pred(state.num_topics());
  for (int z = 0; z < state.num_topics(); ++z)
    topic_pred[z] = std::exp(predictive_log_prob(tb.topic_items[z], item, hp.catalog));
  const double fresh_pred = std::exp(new_topic_log_prob(item, hp.catalog));

  double total = 0.0;
  for (int t = 0; t < state.num_clusters(); ++t) {
    const double denom =
        static_cast<double>(tb.views_per_cluster[t]) + hp.alpha_topic;
    double p = 0.0;
    for (int z = 0; z < state.num_topics(); ++z) {
      const double q = (static_cast<double>(tb.cluster_topic[t][z]) +
                        hp.alpha_topic * pi0.weights[z]) /
                       denom;
      p += q * topic_pred[z];
    }
    p += (hp.alpha_topic * pi0.remainder / denom) * fresh_pred;
    total += w[t] * p;
  }
  double p_new = 0.0;
  for (int z = 0; z < state.num_topics(); ++z)
    p_new += pi0.weights[z] * topic_pred[z];
  p_new += pi0.remainder * fresh_pred;
  total += w.back() * p_new;
  return std::log(total);
}

double heldout_location_log_prob(const ModelState& state, const UnitVec3& x) {
  const auto& hp = state.hyper();
  const auto& tb = state.tables();
  const auto& phi0 = state.location_sticks();
  const auto& prior = hp.location_prior;
  const std::vector<double> w = cluster_mixture_weights(state);

  std::vector<double> factor_pred(state.num_factors());
  for (int s = 0; s < state.num_factors(); ++s)
    factor_pred[s] = std::exp(
        predictive_log_prob(x, tb.factor_direction_sum[s].value(),
                            state.concentration(s), prior));
  const double fresh_pred = expectation_over_lognormal(
      prior.c_log_mean, prior.c_log_sd, [&](double c) {
        return std::exp(predictive_log_prob(x, Vec3{}, c, prior));
      });

  double total = 0.0;
  for (int t = 0; t < state.num_clusters(); ++t) {
    const double denom =
        static_cast<double>(tb.customers_per_cluster[t]) + hp.alpha_location;
    double p = 0.0;
    for (int s = 0; s < state.num_factors(); ++s) {
      const double q = (static_cast<double>(tb.cluster_factor[t][s]) +
                        hp.alpha_location * phi0.weights[s]) /
                       denom;
      p += q * factor_pred[s];
    }
    p += (hp.alpha_location * phi0.remainder / denom) * fresh_pred;
    total += w[t] * p;
  }
  double p_new = 0.0;
  for (int s = 0; s < state.num_factors(); ++s)
    p_new += phi0.weights[s] * factor_pred[s];
  p_new += phi0.remainder * fresh_pred;
  total += w.back() * p_new;
  return std::log(total);
}

HeldoutResult heldout_loglik(const ModelState& state, const Dataset& heldout) {
  HeldoutResult out;
  out.num_customers = heldout.num_customers();
  double loc_sum = 0.0, view_sum = 0.0;
  for (const auto& cust : heldout.customers) {
    loc_sum += heldout_location_log_prob(state, cust.location);
    for (int v : cust.views) {
      view_sum += heldout_item_log_prob(state, v);
      ++out.num_views;
    }
  }
  out.per_location_loglik =
      out.num_customers > 0 ? loc_sum / out.num_customers : 0.0;
  out.per_view_loglik = out.num_views > 0 ? view_sum / out.num_views : 0.0;
  return out;
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size())
    throw DomainError("adjusted_rand_index: partitions differ in length");
  const int n = static_cast<int>(a.size());
  if (n == 0) return 1.0;

  auto relabel = [](std::span<const int> labels) {
    std::vector<int> out(labels.size());
    std::vector<int> seen;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      auto it = std::find(seen.begin(), seen.end(), labels[i]);
      if (it == seen.end()) {
        seen.push_back(labels[i]);
        out[i] = static_cast<int>(seen.size()) - 1;
      } else {
        out[i] = static_cast<int>(it - seen.begin());
      }
    }
    return out;
  };
  const std::vector<int> la = relabel(a);
  const std::vector<int> lb = relabel(b);
  const int ka = 1 + *std::max_element(la.begin(), la.end());
  const int kb = 1 + *std::max_element(lb.begin(), lb.end());

  std::vector<std::vector<std::int64_t>> contingency(
      ka, std::vector<std::int64_t>(kb, 0));
  for (int i = 0; i < n; ++i) ++contingency[la[i]][lb[i]];

  auto choose2 = [](std::int64_t m) { return m * (m - 1) / 2; };
  std::int64_t index = 0, sum_a = 0, sum_b = 0;
  for (int i = 0; i < ka; ++i) {
    std::int64_t row = 0;
    for (int j = 0; j < kb; ++j) {
      index += choose2(contingency[i][j]);
      row += contingency[i][j];
    }
    sum_a += choose2(row);
  }
  for (int j = 0; j < kb; ++j) {
    std::int64_t col = 0;
    for (int i = 0; i < ka; ++i) col += contingency[i][j];
    sum_b += choose2(col);
  }
  const double pairs = static_cast<double>(choose2(n));
  const double expected = static_cast<double>(sum_a) * sum_b / pairs;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;  // both trivial partitions
  return (static_cast<double>(index) - expected) / (max_index - expected);
}

FactorReport summarize(const ModelState& state, int top_k) {
  const auto& tb = state.tables();
  const auto& hp = state.hyper();
  FactorReport report;

  for (int z = 0; z < state.num_topics(); ++z) {
    TopicSummary ts;
    ts.topic = z;
    ts.views = tb.topic_items[z].total;
    std::vector<std::pair<int, double>> mass(hp.catalog.catalog_size);
    const double denom =
        static_cast<double>(tb.topic_items[z].total) + hp.catalog.gamma_sum;
    for (int v = 0; v < hp.catalog.catalog_size; ++v)
      mass[v] = {v, (static_cast<double>(tb.topic_items[z].item_counts[v]) +
                     hp.catalog.gamma[v]) /
                        denom};
    std::stable_sort(mass.begin(), mass.end(),
                     [](const auto& l, const auto& r) { return l.second > r.second; });
    mass.resize(std::min<std::size_t>(mass.size(), top_k));
    ts.top_items = std::move(mass);
    report.topics.push_back(std::move(ts));
  }

  for (int s = 0; s < state.num_factors(); ++s) {
    LocationFactorSummary fs;
    fs.factor = s;
    fs.customers = tb.customers_per_factor[s];
    fs.concentration = state.concentration(s);
    const Vec3 post =
        tb.factor_direction_sum[s].value() * state.concentration(s) +
        hp.location_prior.mu0.vec() * hp.location_prior.c0;
    const double norm = post.norm();
    const UnitVec3 dir = norm > 1e-300 ? UnitVec3::from(post * (1.0 / norm))
                                       : hp.location_prior.mu0;
    fs.mean_direction = unit_to_latlon(dir);
    report.location_factors.push_back(fs);
  }

  for (int t = 0; t < state.num_clusters(); ++t) {
    ClusterSummary cs;
    cs.cluster = t;
    cs.customers = tb.customers_per_cluster[t];
    std::vector<std::pair<int, std::int64_t>> fac, top;
    for (int s = 0; s < state.num_factors(); ++s)
      if (tb.cluster_factor[t][s] > 0) fac.push_back({s, tb.cluster_factor[t][s]});
    for (int z = 0; z < state.num_topics(); ++z)
      if (tb.cluster_topic[t][z] > 0) top.push_back({z, tb.cluster_topic[t][z]});
    auto by_count = [](const auto& l, const auto& r) { return l.second > r.second; };
    std::stable_sort(fac.begin(), fac.end(), by_count);
    std::stable_sort(top.begin(), top.end(), by_count);
    fac.resize(std::min<std::size_t>(fac.size(), top_k));
    top.resize(std::min<std::size_t>(top.size(), top_k));
    cs.top_factors = std::move(fac);
    cs.top_topics = std::move(top);
    report.clusters.push_back(std::move(cs));
  }
  return report;
}

namespace {
std::string title_or_id(int item, const std::vector<std::string>& titles) {
  if (item >= 0 && item < static_cast<int>(titles.size()) && !titles[item].empty())
    return titles[item];
  return "item " + std::to_string(item);
}
}  // namespace

std::string report_to_json(const FactorReport& report,
                           const std::vector<std::string>& titles) {
  nlohmann::json j;
  j["topics"] = nlohmann::json::array();
  for (const auto& ts : report.topics) {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& [item, mass] : ts.top_items) {
      nlohmann::json e{{"item", item}, {"mass", mass}};
      if (!titles.empty()) e["title"] = title_or_id(item, titles);
      items.push_back(e);
    }
    j["topics"].push_back(
        {{"topic", ts.topic}, {"views", ts.views}, {"top_items", items}});
  }
  j["location_factors"] = nlohmann::json::array();
  for (const auto& fs : report.location_factors)
    j["location_factors"].push_back({{"factor", fs.factor},
                                     {"customers", fs.customers},
                                     {"concentration", fs.concentration},
                                     {"lat", fs.mean_direction.lat},
                                     {"lon", fs.mean_direction.lon}});
  j["clusters"] = nlohmann::json::array();
  for (const auto& cs : report.clusters) {
    nlohmann::json fac = nlohmann::json::array();
    for (const auto& [s, n] : cs.top_factors)
      fac.push_back({{"factor", s}, {"customers", n}});
    nlohmann::json top = nlohmann::json::array();
    for (const auto& [z, n] : cs.top_topics)
      top.push_back({{"topic", z}, {"views", n}});
    j["clusters"].push_back({{"cluster", cs.cluster},
                             {"customers", cs.customers},
                             {"top_factors", fac},
                             {"top_topics", top}});
  }
  return j.dump(2) + "\n";
}

std::string report_to_text(const FactorReport& report,
                           const std::vector<std::string>& titles) {
  std::ostringstream out;
  out << "video topics (" << report.topics.size() << ")\n";
  for (const auto& ts : report.topics) {
    out << "  topic " << ts.topic << "  views=" << ts.views << "\n";
    for (const auto& [item, mass] : ts.top_items) {
      out << "    " << title_or_id(item, titles) << "  ";
      out.precision(4);
      out << mass << "\n";
    }
  }
  out << "location factors (" << report.location_factors.size() << ")\n";
  for (const auto& fs : report.location_factors) {
    out.precision(6);
    out << "  factor " << fs.factor << "  customers=" << fs.customers
        << "  c=" << fs.concentration << "  lat=" << fs.mean_direction.lat
        << "  lon=" << fs.mean_direction.lon << "\n";
  }
  out << "interaction clusters (" << report.clusters.size() << ")\n";
  for (const auto& cs : report.clusters) {
    out << "  cluster " << cs.cluster << "  customers=" << cs.customers
        << "\n    factors:";
    for (const auto& [s, n] : cs.top_factors)
      out << " " << s << "(" << n << ")";
    out << "\n    topics:";
    for (const auto& [z, n] : cs.top_topics) out << " " << z << "(" << n << ")";
    out << "\n";
  }
  return out.str();
}

std::string report_to_geojson(const FactorReport& report) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& fs : report.location_factors) {
    features.push_back(
        {{"type", "Feature"},
         {"geometry",
          {{"type", "Point"},
           {"coordinates", {fs.mean_direction.lon, fs.mean_direction.lat}}}},
         {"properties",
          {{"factor", fs.factor},
           {"customers", fs.customers},
           {"concentration", fs.concentration}}}});
  }
  nlohmann::json j{{"type", "FeatureCollection"}, {"features", features}};
  return j.dump(2) + "\n";
}

std::string eval_report_to_json(const EvalReport& report) {
  nlohmann::json j{{"heldout_loglik_per_view", report.heldout_loglik_per_view},
                   {"heldout_loglik_location", report.heldout_loglik_location}};
  if (report.has_ari) {
    j["ari_cluster"] = report.ari_cluster;
    j["ari_factor"] = report.ari_factor;
  }
  j["report"] = nlohmann::json::parse(report_to_json(report.report));
  return j.dump(2) + "\n";
}

}  // namespace geotopics
