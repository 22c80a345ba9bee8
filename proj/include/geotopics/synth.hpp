// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "geotopics/sampler.hpp"
#include "geotopics/state.hpp"

namespace geotopics {

struct SynthConfig {
  int num_customers = 100;
  double views_mean = 20.0;  // Poisson mean for per-customer view counts
  bool fixed_views = false;
  int fixed_view_count = 0;  // used when fixed_views
  int truncation = 100;      // stick-breaking truncation level
  std::uint64_t seed = 1;

  void validate() const;
};

/// Everything the generator knew: assignments, atoms, and (CRP mode only)
/// the global table counts that make exact stick conditioning possible.
struct GroundTruth {
  std::vector<int> cluster;             // per customer
  std::vector<int> factor;              // per customer
  std::vector<std::vector<int>> topic;  // per view
  std::vector<VmfParams> factor_params;
  std::vector<std::vector<double>> topic_item_probs;
  std::vector<std::int64_t> factor_table_counts;  // CRP mode
  std::vector<std::int64_t> topic_table_counts;   // CRP mode
};

/// Truncated stick-breaking forward sampler. Every stick's truncated tail
/// mass must come out below 1e-8 or this throws ConfigError. Labels in the
/// returned GroundTruth are compacted to used atoms.
std::pair<Dataset, GroundTruth> generate(const Hyperparams& hyper,
                                         const SynthConfig& cfg, Rng& rng);

/// Exact (untruncated) forward sampler via the nested restaurant
/// construction; the mode the joint-consistency tests use. Also records the
/// per-atom global table counts.
std::pair<Dataset, GroundTruth> generate_crp(const Hyperparams& hyper,
                                             const SynthConfig& cfg, Rng& rng);

/// Installs a ground-truth assignment into a state. When the truth carries
/// table counts the sticks are drawn exactly from Dirichlet(m..., alpha);
/// otherwise they are resampled from the count tables.
void init_from_truth(ModelState& state, const GroundTruth& truth, Rng& rng);

/// Redraws the observables in place given the current latent state:
/// instantiates each factor's posterior mean direction and each topic's
/// posterior item distribution, redraws locations and items from them, and
/// refreshes the data-dependent tables. View counts stay fixed.
void resample_data(ModelState& state, Dataset& data, Rng& rng);

/// One successive-conditional cycle: resample_data then one Gibbs sweep.
SweepDiagnostics geweke_cycle(GibbsSampler& sampler, Dataset& data, Rng& rng);

}  // namespace geotopics
