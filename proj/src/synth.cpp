// Apache License, Version 2.0, refer to LICENSE.txt

#include "geotopics/synth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "geotopics/error.hpp"

namespace geotopics {

void SynthConfig::validate() const {
  std::vector<std::string> problems;
  if (num_customers < 1) problems.push_back("num_customers must be >= 1");
  if (fixed_views) {
    if (fixed_view_count < 0) problems.push_back("fixed_view_count must be >= 0");
  } else if (!(views_mean >= 0.0)) {
    problems.push_back("views_mean must be >= 0");
  }
  if (truncation < 1) problems.push_back("truncation must be >= 1");
  if (!problems.empty()) {
    std::string msg = "invalid synth config:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw ConfigError(msg);
  }
}

namespace {

// Stick-breaking weights with Beta(1, alpha) proportions, truncated at T.
// Returns normalized weights; throws when the truncated tail mass is not
// negligible.
std::vector<double> stick_break(double alpha, int truncation, Rng& rng) {
  std::vector<double> w(truncation);
  double rest = 1.0;
  for (int k = 0; k < truncation; ++k) {
    const double b = rng.beta(1.0, alpha);
    w[k] = rest * b;
    rest *= (1.0 - b);
  }
  if (rest >= 1e-8)
    throw ConfigError("stick-breaking truncation too small: tail mass " +
                      std::to_string(rest));
  double total = 0.0;
  for (double x : w) total += x;
  for (double& x : w) x /= total;
  return w;
}

int draw_views(const SynthConfig& cfg, Rng& rng) {
  return cfg.fixed_views ? cfg.fixed_view_count : rng.poisson(cfg.views_mean);
}

// Relabels ground-truth indices to a dense range over used atoms, dropping
// unused ones. `used_order` receives old indices in new-label order.
std::vector<int> compact_labels(std::vector<int>& labels, int old_count,
                                std::vector<int>& used_order) {
  std::vector<int> remap(old_count, -1);
  used_order.clear();
  for (int& l : labels) {
    if (remap[l] < 0) {
      remap[l] = static_cast<int>(used_order.size());
      used_order.push_back(l);
    }
    l = remap[l];
  }
  return remap;
}

}  // namespace

std::pair<Dataset, GroundTruth> generate(const Hyperparams& hyper,
                                         const SynthConfig& cfg, Rng& rng) {
  hyper.validate();
  cfg.validate();
  const auto& prior = hyper.location_prior;
  const int T = cfg.truncation;

  // Global atoms and weights.
  const std::vector<double> loc_weights =
      stick_break(hyper.alpha_location_base, T, rng);
  std::vector<VmfParams> loc_atoms;
  loc_atoms.reserve(T);
  for (int k = 0; k < T; ++k)
    loc_atoms.push_back(
        {sample_vmf({prior.mu0, prior.c0}, rng),
         rng.lognormal(prior.c_log_mean, prior.c_log_sd)});

  const std::vector<double> topic_weights =
      stick_break(hyper.alpha_topic_base, T, rng);
  std::vector<std::vector<double>> topic_atoms;
  topic_atoms.reserve(T);
  for (int k = 0; k < T; ++k)
    topic_atoms.push_back(rng.dirichlet(hyper.catalog.gamma));

  // Interaction atoms: pairs of child measures over the global atoms.
  const std::vector<double> pair_weights =
      stick_break(hyper.alpha_interaction, T, rng);
  std::vector<std::vector<double>> pair_loc(T), pair_topic(T);
  {
    std::vector<double> a_loc(T), a_top(T);
    for (int k = 0; k < T; ++k) {
      a_loc[k] = hyper.alpha_location * loc_weights[k];
      a_top[k] = hyper.alpha_topic * topic_weights[k];
    }
    for (int k = 0; k < T; ++k) {
      pair_loc[k] = rng.dirichlet(a_loc);
      pair_topic[k] = rng.dirichlet(a_top);
    }
  }

  Dataset data;
  data.catalog_size = hyper.catalog.catalog_size;
  GroundTruth truth;
  for (int d = 0; d < cfg.num_customers; ++d) {
    const int t = rng.categorical(pair_weights);
    const int s = rng.categorical(pair_loc[t]);
    Customer cust;
    cust.id = "synth-" + std::to_string(d);
    cust.location = sample_vmf(loc_atoms[s], rng);
    const int num_views = draw_views(cfg, rng);
    std::vector<int> zs(num_views);
    cust.views.resize(num_views);
    for (int j = 0; j < num_views; ++j) {
      zs[j] = rng.categorical(pair_topic[t]);
      cust.views[j] = rng.categorical(topic_atoms[zs[j]]);
    }
    data.customers.push_back(std::move(cust));
    truth.cluster.push_back(t);
    truth.factor.push_back(s);
    truth.topic.push_back(std::move(zs));
  }

  // Compact to used atoms.
  std::vector<int> used;
  compact_labels(truth.cluster, T, used);
  compact_labels(truth.factor, T, used);
  for (int old_s : used) truth.factor_params.push_back(loc_atoms[old_s]);
  std::vector<int> flat;
  std::vector<std::size_t> lens;
  for (const auto& zs : truth.topic) {
    lens.push_back(zs.size());
    flat.insert(flat.end(), zs.begin(), zs.end());
  }
  compact_labels(flat, T, used);
  std::size_t pos = 0;
  for (std::size_t d = 0; d < truth.topic.size(); ++d) {
    for (std::size_t j = 0; j < lens[d]; ++j) truth.topic[d][j] = flat[pos++];
  }
  for (int old_z : used) truth.topic_item_probs.push_back(topic_atoms[old_z]);
  return {std::move(data), std::move(truth)};
}

namespace {

// One level of the nested restaurant construction: group-local tables plus
// a shared top-level restaurant whose dishes are the global atoms.
struct Franchise {
  double alpha_group;
  double alpha_base;
  // tables[g] lists (dish, occupancy) per group-level table.
  std::vector<std::vector<std::pair<int, std::int64_t>>> tables;
  std::vector<std::int64_t> dish_table_counts;  // top-level, per dish

  int seat(int group, Rng& rng) {
    if (group >= static_cast<int>(tables.size())) tables.resize(group + 1);
    auto& local = tables[group];
    std::vector<double> w;
    w.reserve(local.size() + 1);
    std::int64_t n = 0;
    for (const auto& [dish, cnt] : local) {
      w.push_back(static_cast<double>(cnt));
      n += cnt;
    }
    w.push_back(alpha_group);
    const int pick = rng.categorical(w);
    if (pick < static_cast<int>(local.size())) {
      ++local[pick].second;
      return local[pick].first;
    }
    // New table: dish from the top-level restaurant.
    std::vector<double> dw;
    dw.reserve(dish_table_counts.size() + 1);
    for (std::int64_t c : dish_table_counts) dw.push_back(static_cast<double>(c));
    dw.push_back(alpha_base);
    int dish = rng.categorical(dw);
    if (dish == static_cast<int>(dish_table_counts.size()))
      dish_table_counts.push_back(0);
    ++dish_table_counts[dish];
    local.emplace_back(dish, 1);
    return dish;
  }
};

}  // namespace

std::pair<Dataset, GroundTruth> generate_crp(const Hyperparams& hyper,
                                             const SynthConfig& cfg, Rng& rng) {
  hyper.validate();
  cfg.validate();
  const auto& prior = hyper.location_prior;

  Dataset data;
  data.catalog_size = hyper.catalog.catalog_size;
  GroundTruth truth;

  std::vector<std::int64_t> cluster_sizes;
  Franchise loc{hyper.alpha_location, hyper.alpha_location_base, {}, {}};
  Franchise top{hyper.alpha_topic, hyper.alpha_topic_base, {}, {}};
  std::vector<VmfParams> loc_atoms;
  std::vector<std::vector<double>> topic_atoms;

  for (int d = 0; d < cfg.num_customers; ++d) {
    // Top-level membership urn.
    std::vector<double> w;
    w.reserve(cluster_sizes.size() + 1);
    for (std::int64_t c : cluster_sizes) w.push_back(static_cast<double>(c));
    w.push_back(hyper.alpha_interaction);
    int t = rng.categorical(w);
    if (t == static_cast<int>(cluster_sizes.size())) cluster_sizes.push_back(0);
    ++cluster_sizes[t];

    const int s = loc.seat(t, rng);
    if (s == static_cast<int>(loc_atoms.size()))
      loc_atoms.push_back(
          {sample_vmf({prior.mu0, prior.c0}, rng),
           rng.lognormal(prior.c_log_mean, prior.c_log_sd)});

    Customer cust;
    cust.id = "synth-" + std::to_string(d);
    cust.location = sample_vmf(loc_atoms[s], rng);
    const int num_views = draw_views(cfg, rng);
    std::vector<int> zs(num_views);
    cust.views.resize(num_views);
    for (int j = 0; j < num_views; ++j) {
      const int z = top.seat(t, rng);
      if (z == static_cast<int>(topic_atoms.size()))
        topic_atoms.push_back(rng.dirichlet(hyper.catalog.gamma));
      zs[j] = z;
      cust.views[j] = rng.categorical(topic_atoms[z]);
    }
    data.customers.push_back(std::move(cust));
    truth.cluster.push_back(t);
    truth.factor.push_back(s);
    truth.topic.push_back(std::move(zs));
  }

  truth.factor_params = std::move(loc_atoms);
  truth.topic_item_probs = std::move(topic_atoms);
  truth.factor_table_counts = std::move(loc.dish_table_counts);
  truth.topic_table_counts = std::move(top.dish_table_counts);
  return {std::move(data), std::move(truth)};
}

namespace {
GlobalSticks sticks_from_table_counts(const std::vector<std::int64_t>& m,
                                      double alpha_base, Rng& rng) {
  if (m.empty()) return GlobalSticks{{}, 1.0};
  std::vector<double> params;
  params.reserve(m.size() + 1);
  for (std::int64_t c : m) params.push_back(static_cast<double>(c));
  params.push_back(alpha_base);
  std::vector<double> draw = rng.dirichlet(params);
  GlobalSticks gs;
  gs.weights.assign(draw.begin(), draw.end() - 1);
  gs.remainder = draw.back();
  const double total = gs.total();
  for (double& w : gs.weights) w /= total;
  gs.remainder /= total;
  return gs;
}
}  // namespace

void init_from_truth(ModelState& state, const GroundTruth& truth, Rng& rng) {
  std::vector<double> concentrations;
  concentrations.reserve(truth.factor_params.size());
  for (const auto& p : truth.factor_params) concentrations.push_back(p.c);
  state.load_assignments(truth.cluster, truth.factor, truth.topic,
                         concentrations);
  const auto& hp = state.hyper();
  if (!truth.factor_table_counts.empty() || !truth.topic_table_counts.empty()) {
    state.set_sticks(sticks_from_table_counts(truth.factor_table_counts,
                                              hp.alpha_location_base, rng),
                     sticks_from_table_counts(truth.topic_table_counts,
                                              hp.alpha_topic_base, rng));
  } else {
    state.resample_location_sticks(rng);
    state.resample_topic_sticks(rng);
  }
  state.audit();
}

void resample_data(ModelState& state, Dataset& data, Rng& rng) {
  if (&state.data() != &data)
    throw StateCorruptionError("resample_data: state is not bound to this dataset");
  const auto& tb = state.tables();
  const auto& prior = state.hyper().location_prior;

  for (int s = 0; s < state.num_factors(); ++s) {
    // Posterior of the factor's mean direction given current members.
    const Vec3 post = tb.factor_direction_sum[s].value() * state.concentration(s) +
                      prior.mu0.vec() * prior.c0;
    const double norm = post.norm();
    const UnitVec3 post_mu =
        norm > 1e-300 ? UnitVec3::from(post * (1.0 / norm)) : prior.mu0;
    const UnitVec3 mu_draw = sample_vmf({post_mu, std::max(norm, 1e-12)}, rng);
    const VmfParams emit{mu_draw, state.concentration(s)};
    for (int d = 0; d < state.num_customers(); ++d)
      if (state.factor_of(d) == s)
        data.customers[d].location = sample_vmf(emit, rng);
  }

  const auto& gamma = state.hyper().catalog.gamma;
  for (int z = 0; z < state.num_topics(); ++z) {
    std::vector<double> post(gamma);
    for (std::size_t v = 0; v < post.size(); ++v)
      post[v] += static_cast<double>(tb.topic_items[z].item_counts[v]);
    const std::vector<double> beta = rng.dirichlet(post);
    for (int d = 0; d < state.num_customers(); ++d) {
      auto& views = data.customers[d].views;
      for (std::size_t j = 0; j < views.size(); ++j)
        if (state.topic_of(d, static_cast<int>(j)) == z)
          views[j] = rng.categorical(beta);
    }
  }
  state.refresh_data_tables();
}

SweepDiagnostics geweke_cycle(GibbsSampler& sampler, Dataset& data, Rng& rng) {
  resample_data(sampler.state(), data, rng);
  return sampler.sweep(rng);
}

}  // namespace geotopics
