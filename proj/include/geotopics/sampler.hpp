// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstdint>
#include <vector>

#include "geotopics/state.hpp"

namespace geotopics {

struct SamplerConfig {
  double mh_step_sigma = 0.5;         // random-walk scale on log c
  int sweeps_per_stick_resample = 1;  // global stick cadence
  std::uint64_t rng_seed = 12345;     // the run's single seed (used by callers)
  int recount_interval = 100;         // direction-sum recomputation cadence
  // Plain-product cluster weights: the per-customer view product keeps
  // counts fixed instead of conditioning on the customer's earlier views.
  bool strict_literal_weights = false;
  std::uint64_t sweep_order_seed = 0;  // 0 = natural customer order
  int tune_burnin_sweeps = 0;          // MH step tuning window; 0 disables
};

struct SweepDiagnostics {
  double log_joint = 0.0;
  int num_clusters = 0;
  int num_factors = 0;
  int num_topics = 0;
  double mh_acceptance_rate = 0.0;
};

/// Unnormalized log target for a factor's concentration given its members:
/// lognormal prior plus the mu-collapsed vMF marginal of the cluster.
double concentration_log_target(double c, std::int64_t n, const Vec3& dir_sum,
                                const VmfPrior& prior);

struct MhStep {
  double c;       // concentration after the step
  bool accepted;  // proposal taken?
};

/// One Metropolis-Hastings step on log c: propose log c' = log c + N(0,
/// step_sigma); accept with min(1, exp(dlog target + dlog c)), the log-c
/// difference being the Jacobian of evaluating the lognormal target in
/// c-space under a log-scale random walk.
MhStep mh_concentration_step(double c, std::int64_t n, const Vec3& dir_sum,
                             const VmfPrior& prior, double step_sigma,
                             Rng& rng);

/// Serial collapsed Gibbs sweeps over a ModelState.
class GibbsSampler {
 public:
  GibbsSampler(ModelState& state, SamplerConfig cfg);

  /// Streaming first pass: every customer must be unassigned. Clusters come
  /// from the membership urn alone, then factors and topics from their full
  /// conditionals given the partial state.
  void initialize(Rng& rng);

  /// One full sweep: reassign every customer's cluster, factor and view
  /// topics, then one MH step per live factor concentration, then sticks
  /// and direction-sum recomputation on their cadences.
  SweepDiagnostics sweep(Rng& rng);

  /// Assignment moves only, for a customer range (shard-local sweeps).
  void sweep_assignments(Rng& rng, int begin, int end);

  /// One MH step for every live factor; returns the acceptance rate.
  double sweep_concentrations(Rng& rng);

  void resample_sticks_now(Rng& rng);

  // Single-variable kernels. Each detaches, draws from the collapsed
  // conditional, and reattaches; the return value is the new index.
  int sample_cluster(int d, Rng& rng);
  int sample_factor(int d, Rng& rng);
  int sample_topic(int d, int j, Rng& rng);

  // Unnormalized log weights, one entry per live candidate plus a final
  // "new" entry. Preconditions: the corresponding detach has been done.
  std::vector<double> cluster_log_weights(int d, int factor_for_d) const;
  std::vector<double> factor_log_weights(int d, double c_new) const;
  std::vector<double> factor_log_weights_for_cluster(int d, int cluster,
                                                     double c_new) const;
  std::vector<double> topic_log_weights(int d, int j) const;

  /// Joint log score of the current state: membership CRP, per-cluster urn
  /// probabilities given the sticks, collapsed vMF and Dirichlet-multinomial
  /// marginals, and the concentration priors.
  double log_joint() const;

  int sweeps_completed() const { return sweeps_completed_; }
  void set_sweeps_completed(int n) { sweeps_completed_ = n; }
  double current_mh_step_sigma() const { return mh_sigma_; }

  ModelState& state() { return state_; }
  const SamplerConfig& config() const { return cfg_; }

 private:
  double topic_product_log(int cluster, int d) const;
  double topic_product_log_new(int d) const;

  ModelState& state_;
  SamplerConfig cfg_;
  std::vector<int> order_;
  int sweeps_completed_ = 0;
  double mh_sigma_;
};

}  // namespace geotopics
