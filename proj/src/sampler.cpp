// Apache License, Version 2.0, refer to LICENSE.txt

#include "geotopics/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "geotopics/error.hpp"

namespace geotopics {

double concentration_log_target(double c, std::int64_t n, const Vec3& dir_sum,
                                const VmfPrior& prior) {
  double lt = log_lognormal_pdf(c, prior.c_log_mean, prior.c_log_sd);
  if (n > 0) lt += log_marginal(dir_sum, n, c, prior);
  return lt;
}

MhStep mh_concentration_step(double c, std::int64_t n, const Vec3& dir_sum,
                             const VmfPrior& prior, double step_sigma,
                             Rng& rng) {
  const double proposal = c * std::exp(rng.normal(0.0, step_sigma));
  const double log_acc =
      (concentration_log_target(proposal, n, dir_sum, prior) + std::log(proposal)) -
      (concentration_log_target(c, n, dir_sum, prior) + std::log(c));
  if (log_acc >= 0.0 || std::log(rng.uniform_pos()) < log_acc)
    return {proposal, true};
  return {c, false};
}

GibbsSampler::GibbsSampler(ModelState& state, SamplerConfig cfg)
    : state_(state), cfg_(cfg), mh_sigma_(cfg.mh_step_sigma) {
  order_.resize(state_.num_customers());
  std::iota(order_.begin(), order_.end(), 0);
  if (cfg_.sweep_order_seed != 0) {
    Rng order_rng(Rng::mix(cfg_.sweep_order_seed, 0xa11ce));
    for (int i = static_cast<int>(order_.size()) - 1; i > 0; --i) {
      const int k = static_cast<int>(order_rng.uniform() * (i + 1));
      std::swap(order_[i], order_[std::min(k, i)]);
    }
  }
}

double GibbsSampler::topic_product_log(int cluster, int d) const {
  const auto& tb = state_.tables();
  const auto& hp = state_.hyper();
  const auto& pi0 = state_.topic_sticks();
  const auto& zs = state_.topic_assignments()[d];
  const double n2 = static_cast<double>(tb.views_per_cluster[cluster]);
  double lp = 0.0;
  if (cfg_.strict_literal_weights) {
    for (int z : zs)
      lp += std::log(static_cast<double>(tb.cluster_topic[cluster][z]) +
                     hp.alpha_topic * pi0.weights[z]) -
            std::log(n2 + hp.alpha_topic);
    return lp;
  }
  // Sequential predictive: each view conditions on the customer's earlier
  // views, so repeats of a topic gain a unit and the denominator advances.
  std::vector<int> seen(state_.num_topics(), 0);
  int j = 0;
  for (int z : zs) {
    lp += std::log(static_cast<double>(tb.cluster_topic[cluster][z]) +
                   hp.alpha_topic * pi0.weights[z] + seen[z]) -
          std::log(n2 + hp.alpha_topic + j);
    ++seen[z];
    ++j;
  }
  return lp;
}

double GibbsSampler::topic_product_log_new(int d) const {
  const auto& hp = state_.hyper();
  const auto& pi0 = state_.topic_sticks();
  const auto& zs = state_.topic_assignments()[d];
  double lp = 0.0;
  if (cfg_.strict_literal_weights) {
    for (int z : zs) lp += std::log(pi0.weights[z]);
    return lp;
  }
  std::vector<int> seen(state_.num_topics(), 0);
  int j = 0;
  for (int z : zs) {
    lp += std::log(hp.alpha_topic * pi0.weights[z] + seen[z]) -
          std::log(hp.alpha_topic + j);
    ++seen[z];
    ++j;
  }
  return lp;
}

std::vector<double> GibbsSampler::cluster_log_weights(int d,
                                                      int factor_for_d) const {
  if (state_.customer_attached(d))
    throw StateCorruptionError("cluster_log_weights: customer must be detached");
  const auto& tb = state_.tables();
  const auto& hp = state_.hyper();
  const auto& phi0 = state_.location_sticks();
  const int num_t = state_.num_clusters();
  std::vector<double> lw(num_t + 1);
  for (int t = 0; t < num_t; ++t) {
    const double n_t = static_cast<double>(tb.customers_per_cluster[t]);
    lw[t] = std::log(n_t) +
            std::log(static_cast<double>(tb.cluster_factor[t][factor_for_d]) +
                     hp.alpha_location * phi0.weights[factor_for_d]) -
            std::log(n_t + hp.alpha_location) + topic_product_log(t, d);
  }
  lw[num_t] = std::log(hp.alpha_interaction) +
              std::log(phi0.weights[factor_for_d]) + topic_product_log_new(d);
  return lw;
}

std::vector<double> GibbsSampler::factor_log_weights_for_cluster(
    int d, int cluster, double c_new) const {
  const auto& tb = state_.tables();
  const auto& hp = state_.hyper();
  const auto& phi0 = state_.location_sticks();
  const auto& prior = hp.location_prior;
  const UnitVec3& x = state_.data().customers[d].location;
  const int num_s = state_.num_factors();
  std::vector<double> lw(num_s + 1);
  for (int s = 0; s < num_s; ++s) {
    lw[s] = std::log(static_cast<double>(tb.cluster_factor[cluster][s]) +
                     hp.alpha_location * phi0.weights[s]) +
            predictive_log_prob(x, tb.factor_direction_sum[s].value(),
                                state_.concentration(s), prior);
  }
  lw[num_s] = std::log(hp.alpha_location * phi0.remainder) +
              predictive_log_prob(x, Vec3{}, c_new, prior);
  return lw;
}

std::vector<double> GibbsSampler::factor_log_weights(int d,
                                                     double c_new) const {
  if (state_.factor_of(d) >= 0)
    throw StateCorruptionError("factor_log_weights: location must be detached");
  return factor_log_weights_for_cluster(d, state_.cluster_of(d), c_new);
}

std::vector<double> GibbsSampler::topic_log_weights(int d, int j) const {
  if (state_.topic_of(d, j) >= 0)
    throw StateCorruptionError("topic_log_weights: view must be detached");
  const auto& tb = state_.tables();
  const auto& hp = state_.hyper();
  const auto& pi0 = state_.topic_sticks();
  const int t = state_.cluster_of(d);
  const int item = state_.data().customers[d].views[j];
  const int num_z = state_.num_topics();
  std::vector<double> lw(num_z + 1);
  for (int z = 0; z < num_z; ++z) {
    lw[z] = std::log(static_cast<double>(tb.cluster_topic[t][z]) +
                     hp.alpha_topic * pi0.weights[z]) +
            predictive_log_prob(tb.topic_items[z], item, hp.catalog);
  }
  lw[num_z] = std::log(hp.alpha_topic * pi0.remainder) +
              new_topic_log_prob(item, hp.catalog);
  return lw;
}

int GibbsSampler::sample_cluster(int d, Rng& rng) {
  const int factor = state_.factor_of(d);
  state_.detach_views_from_cluster(d);
  state_.remove_customer(d);
  const auto lw = cluster_log_weights(d, factor);
  int t = rng.categorical_from_log(lw);
  if (t == state_.num_clusters()) t = state_.create_cluster();
  state_.add_customer(d, t, factor);
  state_.attach_views_to_cluster(d);
  return t;
}

int GibbsSampler::sample_factor(int d, Rng& rng) {
  const auto& prior = state_.hyper().location_prior;
  const int old_factor = state_.factor_of(d);
  // Pruning waits until after the draw: a factor emptied by this detach
  // stays a candidate carrying its own concentration (the non-conjugate
  // auxiliary rule; a fresh prior-drawn concentration only backs the
  // brand-new option).
  state_.detach_location_deferred(d);
  const double c_new = rng.lognormal(prior.c_log_mean, prior.c_log_sd);
  const auto lw = factor_log_weights(d, c_new);
  int s = rng.categorical_from_log(lw);
  if (s == state_.num_factors()) s = state_.create_factor(c_new, rng);
  state_.attach_location(d, s);
  state_.prune_factor_if_empty(old_factor);
  return state_.factor_of(d);
}

int GibbsSampler::sample_topic(int d, int j, Rng& rng) {
  state_.remove_view(d, j);
  const auto lw = topic_log_weights(d, j);
  int z = rng.categorical_from_log(lw);
  if (z == state_.num_topics()) z = state_.create_topic(rng);
  state_.add_view(d, j, z);
  return z;
}

void GibbsSampler::initialize(Rng& rng) {
  const auto& hp = state_.hyper();
  for (int d : order_) {
    if (state_.customer_attached(d))
      throw StateCorruptionError("initialize: customer already assigned");
    // Membership urn only; the customer has no factor or topics yet.
    std::vector<double> lw(state_.num_clusters() + 1);
    for (int t = 0; t < state_.num_clusters(); ++t)
      lw[t] =
          std::log(static_cast<double>(state_.tables().customers_per_cluster[t]));
    lw[state_.num_clusters()] = std::log(hp.alpha_interaction);
    int t = rng.categorical_from_log(lw);
    if (t == state_.num_clusters()) t = state_.create_cluster();

    const double c_new =
        rng.lognormal(hp.location_prior.c_log_mean, hp.location_prior.c_log_sd);
    const auto flw = factor_log_weights_for_cluster(d, t, c_new);
    int s = rng.categorical_from_log(flw);
    if (s == state_.num_factors()) s = state_.create_factor(c_new, rng);
    state_.add_customer(d, t, s);

    const int num_views = static_cast<int>(state_.data().customers[d].views.size());
    for (int j = 0; j < num_views; ++j) {
      const auto zlw = topic_log_weights(d, j);
      int z = rng.categorical_from_log(zlw);
      if (z == state_.num_topics()) z = state_.create_topic(rng);
      state_.add_view(d, j, z);
    }
  }
}

void GibbsSampler::sweep_assignments(Rng& rng, int begin, int end) {
  for (int d : order_) {
    if (d < begin || d >= end) continue;
    sample_cluster(d, rng);
    sample_factor(d, rng);
    const int num_views = static_cast<int>(state_.data().customers[d].views.size());
    for (int j = 0; j < num_views; ++j) sample_topic(d, j, rng);
  }
}

double GibbsSampler::sweep_concentrations(Rng& rng) {
  const auto& tb = state_.tables();
  const auto& prior = state_.hyper().location_prior;
  int accepted = 0;
  const int num_s = state_.num_factors();
  for (int s = 0; s < num_s; ++s) {
    const MhStep step = mh_concentration_step(
        state_.concentration(s), tb.customers_per_factor[s],
        tb.factor_direction_sum[s].value(), prior, mh_sigma_, rng);
    state_.set_concentration(s, step.c);
    accepted += step.accepted ? 1 : 0;
  }
  return num_s > 0 ? static_cast<double>(accepted) / num_s : 1.0;
}

void GibbsSampler::resample_sticks_now(Rng& rng) {
  state_.resample_location_sticks(rng);
  state_.resample_topic_sticks(rng);
}

SweepDiagnostics GibbsSampler::sweep(Rng& rng) {
  sweep_assignments(rng, 0, state_.num_customers());
  const double acc = sweep_concentrations(rng);
  ++sweeps_completed_;
  if (cfg_.sweeps_per_stick_resample > 0 &&
      sweeps_completed_ % cfg_.sweeps_per_stick_resample == 0)
    resample_sticks_now(rng);
  if (cfg_.recount_interval > 0 &&
      sweeps_completed_ % cfg_.recount_interval == 0)
    state_.recompute_direction_sums();
  if (sweeps_completed_ <= cfg_.tune_burnin_sweeps) {
    // Crude step tuning, burn-in only; measurement sweeps keep a fixed step.
    if (acc < 0.15) mh_sigma_ *= 0.7;
    if (acc > 0.6) mh_sigma_ *= 1.3;
  }
  SweepDiagnostics d;
  d.log_joint = log_joint();
  d.num_clusters = state_.num_clusters();
  d.num_factors = state_.num_factors();
  d.num_topics = state_.num_topics();
  d.mh_acceptance_rate = acc;
  return d;
}

double GibbsSampler::log_joint() const {
  const auto& tb = state_.tables();
  const auto& hp = state_.hyper();
  const auto& phi0 = state_.location_sticks();
  const auto& pi0 = state_.topic_sticks();
  double lj = 0.0;

  std::int64_t attached = 0;
  for (std::int64_t n : tb.customers_per_cluster) attached += n;
  lj += state_.num_clusters() * std::log(hp.alpha_interaction) +
        std::lgamma(hp.alpha_interaction) -
        std::lgamma(hp.alpha_interaction + static_cast<double>(attached));
  for (std::int64_t n : tb.customers_per_cluster)
    lj += std::lgamma(static_cast<double>(n));

  for (int t = 0; t < state_.num_clusters(); ++t) {
    lj += std::lgamma(hp.alpha_location) -
          std::lgamma(hp.alpha_location +
                      static_cast<double>(tb.customers_per_cluster[t]));
    for (int s = 0; s < state_.num_factors(); ++s) {
      const std::int64_t n = tb.cluster_factor[t][s];
      if (n == 0) continue;
      const double base = hp.alpha_location * phi0.weights[s];
      lj += std::lgamma(base + static_cast<double>(n)) - std::lgamma(base);
    }
    lj += std::lgamma(hp.alpha_topic) -
          std::lgamma(hp.alpha_topic +
                      static_cast<double>(tb.views_per_cluster[t]));
    for (int z = 0; z < state_.num_topics(); ++z) {
      const std::int64_t n = tb.cluster_topic[t][z];
      if (n == 0) continue;
      const double base = hp.alpha_topic * pi0.weights[z];
      lj += std::lgamma(base + static_cast<double>(n)) - std::lgamma(base);
    }
  }

  for (int s = 0; s < state_.num_factors(); ++s) {
    lj += log_marginal(tb.factor_direction_sum[s].value(),
                       tb.customers_per_factor[s], state_.concentration(s),
                       hp.location_prior) +
          log_lognormal_pdf(state_.concentration(s),
                            hp.location_prior.c_log_mean,
                            hp.location_prior.c_log_sd);
  }
  for (int z = 0; z < state_.num_topics(); ++z)
    lj += log_marginal(tb.topic_items[z], hp.catalog);
  return lj;
}

}  // namespace geotopics
