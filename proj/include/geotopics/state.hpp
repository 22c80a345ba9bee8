// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geotopics/dirmult.hpp"
#include "geotopics/geo.hpp"
#include "geotopics/rng.hpp"
#include "geotopics/vmf.hpp"

namespace geotopics {

/// All fixed scalars of the model. The DP concentrations are not resampled.
struct Hyperparams {
  double alpha_interaction = 1.0;    // top-level DP over (location, topic) pairs
  double alpha_location = 1.0;       // per-cluster DP over location factors
  double alpha_topic = 1.0;          // per-cluster DP over video topics
  double alpha_location_base = 1.0;  // global location-factor DP
  double alpha_topic_base = 1.0;     // global topic DP
  CatalogParams catalog;
  VmfPrior location_prior{UnitVec3::from(Vec3{1.0, 0.0, 0.0}), 0.01,
                          2.302585092994046, 1.0};

  /// Throws ConfigError listing every violated constraint at once.
  void validate() const;
};

struct Customer {
  std::string id;
  UnitVec3 location = UnitVec3::from(Vec3{1.0, 0.0, 0.0});
  std::vector<int> views;
};

struct Dataset {
  std::vector<Customer> customers;
  int catalog_size = 0;

  int num_customers() const { return static_cast<int>(customers.size()); }
  std::int64_t total_views() const;
};

/// Finite-plus-remainder representation of a global DP draw: one weight per
/// live factor plus the mass of all unrepresented atoms. Sums to 1.
struct GlobalSticks {
  std::vector<double> weights;
  double remainder = 1.0;

  double total() const;
  int size() const { return static_cast<int>(weights.size()); }
};

/// Kahan-compensated 3-vector accumulator; keeps per-factor direction sums
/// within ~1e-15 of exact over millions of add/remove pairs.
struct CompensatedVec3 {
  Vec3 sum{0.0, 0.0, 0.0};
  Vec3 carry{0.0, 0.0, 0.0};

  void add(const Vec3& v);
  void subtract(const Vec3& v) { add(v * -1.0); }
  const Vec3& value() const { return sum; }
};

/// Every sufficient statistic the collapsed sampler needs. The tables are a
/// pure function of the assignments plus the data; audit() enforces that.
struct CountTables {
  // Interaction clusters (index t).
  std::vector<std::int64_t> customers_per_cluster;        // n_t (== its s-marginal)
  std::vector<std::int64_t> views_per_cluster;            // z-marginal per cluster
  std::vector<std::vector<std::int64_t>> cluster_factor;  // [t][s] customers
  std::vector<std::vector<std::int64_t>> cluster_topic;   // [t][z] views
  // Location factors (index s).
  std::vector<std::int64_t> customers_per_factor;
  std::vector<CompensatedVec3> factor_direction_sum;
  // Video topics (index z).
  std::vector<TopicCounts> topic_items;

  int num_clusters() const { return static_cast<int>(customers_per_cluster.size()); }
  int num_factors() const { return static_cast<int>(customers_per_factor.size()); }
  int num_topics() const { return static_cast<int>(topic_items.size()); }
};

/// Chinese-restaurant-table draw: number of occupied tables when n customers
/// are seated sequentially with pseudo-mass `mass` (customer i joins a new
/// table with probability mass / (mass + i)). Exact for any n.
int sample_table_count(std::int64_t n, double mass, Rng& rng);

/// Direct-assignment stick resampling. counts_by_group[g][k] are the
/// per-group counts for factor k, factor_pseudo_mass[k] is the group-level
/// concentration times factor k's current stick weight. Draws auxiliary
/// table counts per (group, factor) with sample_table_count, then
/// (weights..., remainder) ~ Dirichlet(m_1, ..., m_K, alpha_base).
/// No factors (or no counts at all) gives {empty, 1}.
GlobalSticks resample_sticks(
    const std::vector<std::vector<std::int64_t>>& counts_by_group,
    const std::vector<double>& factor_pseudo_mass, double alpha_base,
    Rng& rng);

/// The full latent state: assignments, per-factor concentrations, count
/// tables, and the two global stick vectors.
///
/// Mutation goes through guarded transactions; misuse (double-remove,
/// add-while-assigned, dangling contributions) throws StateCorruptionError.
/// Emptied entities are pruned and compacted immediately unless
/// defer_pruning is set (shard mode), where zombie entities stay so factor
/// indices remain stable for delta merging.
class ModelState {
 public:
  ModelState(const Dataset* data, Hyperparams hp);

  const Dataset& data() const { return *data_; }
  const Hyperparams& hyper() const { return hp_; }

  int num_customers() const { return data_->num_customers(); }
  int num_clusters() const { return tables_.num_clusters(); }
  int num_factors() const { return tables_.num_factors(); }
  int num_topics() const { return tables_.num_topics(); }

  int cluster_of(int d) const { return cluster_of_[d]; }
  int factor_of(int d) const { return factor_of_[d]; }
  int topic_of(int d, int j) const { return topic_of_[d][j]; }
  const std::vector<std::vector<int>>& topic_assignments() const {
    return topic_of_;
  }
  const std::vector<int>& cluster_assignments() const { return cluster_of_; }
  const std::vector<int>& factor_assignments() const { return factor_of_; }
  double concentration(int s) const { return concentration_[s]; }
  const std::vector<double>& concentrations() const { return concentration_; }
  bool customer_attached(int d) const { return cluster_of_[d] >= 0; }
  bool views_clustered(int d) const { return views_clustered_[d] != 0; }

  const CountTables& tables() const { return tables_; }
  const GlobalSticks& location_sticks() const { return location_sticks_; }
  const GlobalSticks& topic_sticks() const { return topic_sticks_; }

  // Entity creation. Factor/topic birth carves the new atom's stick weight
  // out of the remainder with a Beta(1, alpha_base) split.
  int create_cluster();
  int create_factor(double concentration, Rng& rng);
  int create_topic(Rng& rng);

  // Customer-level transaction: n_t, cluster_factor, customers_per_factor,
  // direction sums. Views are handled separately.
  void add_customer(int d, int cluster, int factor);
  void remove_customer(int d);

  // Per-view transaction: cluster_topic + views_per_cluster + topic_items.
  void add_view(int d, int j, int topic);
  void remove_view(int d, int j);

  // Location-only transaction (cluster fixed), for factor reassignment.
  // The deferred variant never prunes an emptied factor: the factor stays a
  // live candidate (with its concentration and stick weight) until the
  // caller settles the reassignment and calls prune_factor_if_empty.
  void detach_location(int d);
  void detach_location_deferred(int d);
  void attach_location(int d, int factor);
  void prune_factor_if_empty(int factor);

  // Cluster-side-only view transaction, for cluster reassignment: moves the
  // customer's views out of / into the cluster_topic tables while the views
  // keep their topics (topic_items untouched, no topic can die here).
  void detach_views_from_cluster(int d);
  void attach_views_to_cluster(int d);

  void set_concentration(int s, double c);
  void set_sticks(GlobalSticks location, GlobalSticks topic);
  void set_defer_pruning(bool defer) { defer_pruning_ = defer; }
  bool defer_pruning() const { return defer_pruning_; }

  void resample_location_sticks(Rng& rng);
  void resample_topic_sticks(Rng& rng);

  /// Rebuilds all tables from the assignment arrays; the independent route
  /// the incremental tables are audited against.
  CountTables recompute_tables() const;

  /// Incremental tables must equal recomputed ones: integer tables exactly,
  /// direction sums within direction_tol, sticks summing to 1 within 1e-12.
  /// Throws StateCorruptionError with a description on any mismatch.
  void audit(double direction_tol = 1e-10) const;

  /// Replaces direction sums with freshly accumulated ones (drift control).
  void recompute_direction_sums();

  /// Re-derives every data-dependent table (direction sums, topic item
  /// counts) after the underlying Dataset was rewritten in place.
  void refresh_data_tables();

  /// Wholesale state install (checkpoint load, ground-truth init): sets the
  /// assignment arrays and concentrations, rebuilds tables, validates.
  void load_assignments(std::vector<int> cluster, std::vector<int> factor,
                        std::vector<std::vector<int>> topics,
                        std::vector<double> concentrations);

  // Raw mutable access for the shard-merge machinery only.
  CountTables& tables_mut() { return tables_; }
  std::vector<int>& cluster_assignments_mut() { return cluster_of_; }
  std::vector<int>& factor_assignments_mut() { return factor_of_; }
  std::vector<std::vector<int>>& topic_assignments_mut() { return topic_of_; }
  std::vector<double>& concentrations_mut() { return concentration_; }
  GlobalSticks& location_sticks_mut() { return location_sticks_; }
  GlobalSticks& topic_sticks_mut() { return topic_sticks_; }

  /// Prunes every entity with zero members and compacts indices (used after
  /// a merge, where pruning was deferred).
  void prune_all_empty();

 private:
  void prune_cluster(int t);
  void prune_factor(int s);
  void prune_topic(int z);
  void corrupt(const std::string& what) const;

  const Dataset* data_;
  Hyperparams hp_;

  std::vector<int> cluster_of_;
  std::vector<int> factor_of_;
  std::vector<std::vector<int>> topic_of_;
  std::vector<char> views_clustered_;
  std::vector<double> concentration_;

  CountTables tables_;
  GlobalSticks location_sticks_;
  GlobalSticks topic_sticks_;
  bool defer_pruning_ = false;
};

}  // namespace geotopics
