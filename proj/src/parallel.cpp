// Apache License, Version 2.0, refer to LICENSE.txt

#include "geotopics/parallel.hpp"

#include <algorithm>
#include <thread>

#include "geotopics/error.hpp"

namespace geotopics {

std::vector<std::pair<int, int>> partition_ranges(int n, int workers) {
  if (workers < 1) throw ConfigError("workers must be >= 1");
  const int p = std::max(1, std::min(workers, std::max(n, 1)));
  std::vector<std::pair<int, int>> ranges;
  ranges.reserve(p);
  const int base = n / p;
  const int extra = n % p;
  int at = 0;
  for (int i = 0; i < p; ++i) {
    const int len = base + (i < extra ? 1 : 0);
    ranges.emplace_back(at, at + len);
    at += len;
  }
  return ranges;
}

std::vector<Shard> make_shards(const ModelState& global,
                               const std::vector<std::pair<int, int>>& ranges,
                               int epoch) {
  std::vector<Shard> shards;
  shards.reserve(ranges.size());
  for (const auto& [begin, end] : ranges) {
    Shard sh{begin,
             end,
             global,
             global.tables(),
             global.location_sticks(),
             global.topic_sticks(),
             epoch};
    sh.state.set_defer_pruning(true);
    shards.push_back(std::move(sh));
  }
  return shards;
}

namespace {

std::int64_t clamped_add(std::int64_t& target, std::int64_t delta,
                         std::int64_t& clamped) {
  target += delta;
  if (target < 0) {
    target = 0;
    ++clamped;
  }
  return target;
}

}  // namespace

MergeOutcome merge(ModelState& global, std::vector<Shard>& shards,
                   int expected_epoch) {
  MergeOutcome outcome;
  const int t0 = global.num_clusters();
  const int s0 = global.num_factors();
  const int z0 = global.num_topics();
  for (const auto& sh : shards) {
    if (sh.epoch != expected_epoch)
      throw MergeEpochError("merge: shard epoch " + std::to_string(sh.epoch) +
                            " does not match expected " +
                            std::to_string(expected_epoch));
    if (sh.before.num_clusters() != t0 || sh.before.num_factors() != s0 ||
        sh.before.num_topics() != z0)
      throw MergeEpochError("merge: shard snapshot dimensions disagree with global");
  }

  // Index maps: pre-existing entities keep their index, shard-born ones are
  // appended shard by shard (no cross-shard fusion).
  int num_t = t0, num_s = s0, num_z = z0;
  std::vector<int> t_base(shards.size()), s_base(shards.size()),
      z_base(shards.size());
  for (std::size_t i = 0; i < shards.size(); ++i) {
    t_base[i] = num_t;
    s_base[i] = num_s;
    z_base[i] = num_z;
    num_t += shards[i].state.num_clusters() - t0;
    num_s += shards[i].state.num_factors() - s0;
    num_z += shards[i].state.num_topics() - z0;
  }
  auto map_t = [&](std::size_t i, int t) {
    return t < t0 ? t : t_base[i] + (t - t0);
  };
  auto map_s = [&](std::size_t i, int s) {
    return s < s0 ? s : s_base[i] + (s - s0);
  };
  auto map_z = [&](std::size_t i, int z) {
    return z < z0 ? z : z_base[i] + (z - z0);
  };

  // Grow the global tables to merged dimensions.
  CountTables& tb = global.tables_mut();
  tb.customers_per_cluster.resize(num_t, 0);
  tb.views_per_cluster.resize(num_t, 0);
  for (auto& row : tb.cluster_factor) row.resize(num_s, 0);
  for (auto& row : tb.cluster_topic) row.resize(num_z, 0);
  tb.cluster_factor.resize(num_t, std::vector<std::int64_t>(num_s, 0));
  tb.cluster_topic.resize(num_t, std::vector<std::int64_t>(num_z, 0));
  tb.customers_per_factor.resize(num_s, 0);
  tb.factor_direction_sum.resize(num_s, CompensatedVec3{});
  tb.topic_items.resize(num_z,
                        TopicCounts(global.hyper().catalog.catalog_size));
  global.concentrations_mut().resize(num_s, 1.0);

  GlobalSticks& loc_sticks = global.location_sticks_mut();
  GlobalSticks& top_sticks = global.topic_sticks_mut();
  loc_sticks.weights.resize(num_s, 0.0);
  top_sticks.weights.resize(num_z, 0.0);
  double loc_rem_shrink = 1.0, top_rem_shrink = 1.0;

  for (std::size_t i = 0; i < shards.size(); ++i) {
    const Shard& sh = shards[i];
    const CountTables& after = sh.state.tables();
    const CountTables& before = sh.before;
    const int lt = sh.state.num_clusters();
    const int ls = sh.state.num_factors();
    const int lz = sh.state.num_topics();

    auto delta_at = [&](const std::vector<std::int64_t>& now,
                        const std::vector<std::int64_t>& snap, int idx) {
      const std::int64_t a = now[idx];
      const std::int64_t b =
          idx < static_cast<int>(snap.size()) ? snap[idx] : 0;
      return a - b;
    };

    for (int t = 0; t < lt; ++t) {
      const int gt = map_t(i, t);
      clamped_add(tb.customers_per_cluster[gt],
                  delta_at(after.customers_per_cluster,
                           before.customers_per_cluster, t),
                  outcome.clamped);
      clamped_add(tb.views_per_cluster[gt],
                  delta_at(after.views_per_cluster, before.views_per_cluster, t),
                  outcome.clamped);
      for (int s = 0; s < ls; ++s) {
        const std::int64_t snap =
            (t < t0 && s < s0) ? before.cluster_factor[t][s] : 0;
        clamped_add(tb.cluster_factor[gt][map_s(i, s)],
                    after.cluster_factor[t][s] - snap, outcome.clamped);
      }
      for (int z = 0; z < lz; ++z) {
        const std::int64_t snap =
            (t < t0 && z < z0) ? before.cluster_topic[t][z] : 0;
        clamped_add(tb.cluster_topic[gt][map_z(i, z)],
                    after.cluster_topic[t][z] - snap, outcome.clamped);
      }
    }
    for (int s = 0; s < ls; ++s) {
      const int gs = map_s(i, s);
      clamped_add(tb.customers_per_factor[gs],
                  delta_at(after.customers_per_factor,
                           before.customers_per_factor, s),
                  outcome.clamped);
      const Vec3 snap = s < s0 ? before.factor_direction_sum[s].value() : Vec3{};
      tb.factor_direction_sum[gs].add(after.factor_direction_sum[s].value() -
                                      snap);
      if (s >= s0) {
        global.concentrations_mut()[gs] = sh.state.concentration(s);
        loc_sticks.weights[gs] = sh.state.location_sticks().weights[s];
      }
    }
    for (int z = 0; z < lz; ++z) {
      const int gz = map_z(i, z);
      const TopicCounts& now = after.topic_items[z];
      for (int v = 0; v < global.hyper().catalog.catalog_size; ++v) {
        const std::int64_t snap = z < z0 ? before.topic_items[z].item_counts[v] : 0;
        clamped_add(tb.topic_items[gz].item_counts[v],
                    now.item_counts[v] - snap, outcome.clamped);
      }
      const std::int64_t snap_total = z < z0 ? before.topic_items[z].total : 0;
      clamped_add(tb.topic_items[gz].total, now.total - snap_total,
                  outcome.clamped);
      if (z >= z0)
        top_sticks.weights[gz] = sh.state.topic_sticks().weights[z];
    }
    if (sh.location_sticks_before.remainder > 0.0)
      loc_rem_shrink *= sh.state.location_sticks().remainder /
                        sh.location_sticks_before.remainder;
    if (sh.topic_sticks_before.remainder > 0.0)
      top_rem_shrink *= sh.state.topic_sticks().remainder /
                        sh.topic_sticks_before.remainder;

    // Assignment writeback for the shard's own customers.
    for (int d = sh.begin; d < sh.end; ++d) {
      global.cluster_assignments_mut()[d] = map_t(i, sh.state.cluster_of(d));
      global.factor_assignments_mut()[d] = map_s(i, sh.state.factor_of(d));
      auto& topics = global.topic_assignments_mut()[d];
      for (std::size_t j = 0; j < topics.size(); ++j)
        topics[j] = map_z(i, sh.state.topic_of(d, static_cast<int>(j)));
    }
  }

  loc_sticks.remainder *= loc_rem_shrink;
  top_sticks.remainder *= top_rem_shrink;
  auto renormalize = [](GlobalSticks& gs) {
    const double total = gs.total();
    for (double& w : gs.weights) w /= total;
    gs.remainder /= total;
  };
  renormalize(loc_sticks);
  renormalize(top_sticks);
  return outcome;
}

ParallelResult run_parallel(
    GibbsSampler& sampler, const MergePolicy& policy, int workers,
    int n_sweeps, std::uint64_t shard_seed_base, Rng& master,
    const std::function<void(const EpochRecord&)>& on_epoch) {
  if (policy.sync_interval < 1)
    throw ConfigError("sync_interval must be >= 1");
  ModelState& state = sampler.state();
  ParallelResult result;

  if (workers <= 1 || state.num_customers() <= 1) {
    // Degenerate parallelism: the single shard is the global state and uses
    // the master stream, which makes this exactly the serial sampler.
    for (int k = 0; k < n_sweeps; ++k) {
      const SweepDiagnostics d = sampler.sweep(master);
      EpochRecord rec{k,
                      sampler.sweeps_completed(),
                      d.log_joint,
                      d.num_clusters,
                      d.num_factors,
                      d.num_topics,
                      d.mh_acceptance_rate,
                      0};
      if (on_epoch) on_epoch(rec);
      result.records.push_back(rec);
    }
    return result;
  }

  const auto ranges = partition_ranges(state.num_customers(), workers);
  std::vector<Rng> shard_rngs;
  shard_rngs.reserve(ranges.size());
  for (std::size_t i = 0; i < ranges.size(); ++i)
    shard_rngs.emplace_back(Rng::mix(shard_seed_base, i));

  const SamplerConfig& cfg = sampler.config();
  int epoch = 0;
  int remaining = n_sweeps;
  while (remaining > 0) {
    const int local_sweeps = std::min(policy.sync_interval, remaining);
    std::vector<Shard> shards = make_shards(state, ranges, epoch);
    std::vector<std::thread> threads;
    threads.reserve(shards.size());
    for (std::size_t i = 0; i < shards.size(); ++i) {
      threads.emplace_back([&, i]() {
        GibbsSampler local(shards[i].state, cfg);
        for (int k = 0; k < local_sweeps; ++k)
          local.sweep_assignments(shard_rngs[i], shards[i].begin,
                                  shards[i].end);
      });
    }
    for (auto& th : threads) th.join();

    const MergeOutcome mo = merge(state, shards, epoch);
    result.total_clamped += mo.clamped;
    state.prune_all_empty();

    const double acc = sampler.sweep_concentrations(master);
    const int before_count = sampler.sweeps_completed();
    sampler.set_sweeps_completed(before_count + local_sweeps);
    const auto crossed = [&](int interval) {
      return interval > 0 && sampler.sweeps_completed() / interval >
                                 before_count / interval;
    };
    if (crossed(cfg.sweeps_per_stick_resample)) sampler.resample_sticks_now(master);
    if (crossed(cfg.recount_interval)) state.recompute_direction_sums();

    EpochRecord rec{epoch,
                    sampler.sweeps_completed(),
                    sampler.log_joint(),
                    state.num_clusters(),
                    state.num_factors(),
                    state.num_topics(),
                    acc,
                    mo.clamped};
    if (on_epoch) on_epoch(rec);
    result.records.push_back(rec);
    ++epoch;
    remaining -= local_sweeps;
  }
  return result;
}

}  // namespace geotopics
