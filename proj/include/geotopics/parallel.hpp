// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "geotopics/sampler.hpp"
#include "geotopics/state.hpp"

namespace geotopics {

struct MergePolicy {
  int sync_interval = 1;  // local sweeps between global merges
};

/// A worker's private slice of the run: a contiguous customer range, a deep
/// copy of the full state (with pruning deferred so factor indices stay
/// stable), and the epoch-start snapshot the merge diffs against.
struct Shard {
  int begin = 0;
  int end = 0;
  ModelState state;
  CountTables before;
  GlobalSticks location_sticks_before;
  GlobalSticks topic_sticks_before;
  int epoch = 0;
};

/// Contiguous near-equal ranges; degenerates to one shard per customer when
/// workers > n.
std::vector<std::pair<int, int>> partition_ranges(int n, int workers);

/// Deep-copies the global state into one shard per range.
std::vector<Shard> make_shards(const ModelState& global,
                               const std::vector<std::pair<int, int>>& ranges,
                               int epoch);

struct MergeOutcome {
  std::int64_t clamped = 0;  // count entries clamped at zero (pathology guard)
};

/// Count-delta reduction: global += sum over shards of (local - snapshot),
/// with shard-born factors appended as distinct new factors (no cross-shard
/// fusion) and shard customers' assignments written back through the index
/// remap. Throws MergeEpochError when shards disagree with expected_epoch.
MergeOutcome merge(ModelState& global, std::vector<Shard>& shards,
                   int expected_epoch);

struct EpochRecord {
  int epoch = 0;
  int sweeps_completed = 0;
  double log_joint = 0.0;
  int num_clusters = 0;
  int num_factors = 0;
  int num_topics = 0;
  double mh_acceptance_rate = 0.0;
  std::int64_t clamp_warnings = 0;
};

struct ParallelResult {
  std::vector<EpochRecord> records;
  std::int64_t total_clamped = 0;
};

/// Alternates shard-local assignment sweeps with global merges; concentration
/// MH steps and stick resampling run globally between epochs. With one worker
/// the shard consumes the master stream and runs the exact serial sweep, so
/// the run is bit-identical to GibbsSampler::sweep loops.
ParallelResult run_parallel(
    GibbsSampler& sampler, const MergePolicy& policy, int workers,
    int n_sweeps, std::uint64_t shard_seed_base, Rng& master,
    const std::function<void(const EpochRecord&)>& on_epoch = {});

}  // namespace geotopics
