// Apache License, Version 2.0, refer to LICENSE.txt

#include "geotopics/state.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "geotopics/error.hpp"

namespace geotopics {

void Hyperparams::validate() const {
  std::vector<std::string> problems;
  auto pos = [&](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      problems.push_back(std::string(name) + " must be a positive finite real");
  };
  pos(alpha_interaction, "alpha_interaction");
  pos(alpha_location, "alpha_location");
  pos(alpha_topic, "alpha_topic");
  pos(alpha_location_base, "alpha_location_base");
  pos(alpha_topic_base, "alpha_topic_base");
  if (catalog.catalog_size < 1) problems.push_back("catalog_size must be >= 1");
  if (catalog.gamma.size() != static_cast<std::size_t>(catalog.catalog_size))
    problems.push_back("gamma vector length must equal catalog_size");
  for (double g : catalog.gamma)
    if (!(g > 0.0)) {
      problems.push_back("all gamma_v must be > 0");
      break;
    }
  pos(location_prior.c0, "c0");
  pos(location_prior.c_log_sd, "c_log_sd");
  if (!std::isfinite(location_prior.c_log_mean))
    problems.push_back("c_log_mean must be finite");
  if (!problems.empty()) {
    std::ostringstream oss;
    oss << "invalid hyperparameters:";
    for (const auto& p : problems) oss << "\n  - " << p;
    throw ConfigError(oss.str());
  }
}

std::int64_t Dataset::total_views() const {
  std::int64_t n = 0;
  for (const auto& c : customers) n += static_cast<std::int64_t>(c.views.size());
  return n;
}

double GlobalSticks::total() const {
  double t = remainder;
  for (double w : weights) t += w;
  return t;
}

namespace {
void kahan_add(double& sum, double& carry, double v) {
  const double y = v - carry;
  const double t = sum + y;
  carry = (t - sum) - y;
  sum = t;
}
}  // namespace

void CompensatedVec3::add(const Vec3& v) {
  kahan_add(sum.x, carry.x, v.x);
  kahan_add(sum.y, carry.y, v.y);
  kahan_add(sum.z, carry.z, v.z);
}

int sample_table_count(std::int64_t n, double mass, Rng& rng) {
  if (n < 0) throw DomainError("sample_table_count: n must be >= 0");
  if (n == 0) return 0;
  // Seat simulation and the Bernoulli-sum form are the same recursion:
  // customer i (0-based) opens a table with probability mass / (mass + i),
  // and the first customer always does.
  int m = 1;
  for (std::int64_t i = 1; i < n; ++i) {
    const double p = mass / (mass + static_cast<double>(i));
    if (rng.uniform() < p) ++m;
  }
  return m;
}

GlobalSticks resample_sticks(
    const std::vector<std::vector<std::int64_t>>& counts_by_group,
    const std::vector<double>& factor_pseudo_mass, double alpha_base,
    Rng& rng) {
  const int num_factors = static_cast<int>(factor_pseudo_mass.size());
  std::vector<std::int64_t> table_counts(num_factors, 0);
  for (const auto& group : counts_by_group) {
    if (static_cast<int>(group.size()) != num_factors)
      throw StateCorruptionError("resample_sticks: ragged count table");
    for (int k = 0; k < num_factors; ++k)
      table_counts[k] += sample_table_count(group[k], factor_pseudo_mass[k], rng);
  }
  bool any = false;
  for (auto m : table_counts) any = any || m > 0;
  if (!any) return GlobalSticks{{}, 1.0};

  std::vector<double> dir_params;
  dir_params.reserve(num_factors + 1);
  for (int k = 0; k < num_factors; ++k) {
    if (table_counts[k] == 0)
      throw StateCorruptionError(
          "resample_sticks: live factor with zero count (prune first)");
    dir_params.push_back(static_cast<double>(table_counts[k]));
  }
  dir_params.push_back(alpha_base);
  std::vector<double> draw = rng.dirichlet(dir_params);

  GlobalSticks out;
  out.weights.assign(draw.begin(), draw.end() - 1);
  out.remainder = draw.back();
  // Exact renormalization so the sum-to-one invariant holds bitwise-tightly.
  const double total = out.total();
  for (double& w : out.weights) w /= total;
  out.remainder /= total;
  return out;
}

ModelState::ModelState(const Dataset* data, Hyperparams hp)
    : data_(data), hp_(std::move(hp)) {
  hp_.validate();
  const int n = data_->num_customers();
  cluster_of_.assign(n, -1);
  factor_of_.assign(n, -1);
  views_clustered_.assign(n, 1);
  topic_of_.resize(n);
  for (int d = 0; d < n; ++d) {
    topic_of_[d].assign(data_->customers[d].views.size(), -1);
    for (int v : data_->customers[d].views)
      if (v < 0 || v >= hp_.catalog.catalog_size)
        throw InvalidItemError("customer " + data_->customers[d].id +
                               " has item index " + std::to_string(v) +
                               " outside the catalog");
  }
}

void ModelState::corrupt(const std::string& what) const {
  throw StateCorruptionError("state corruption: " + what);
}

int ModelState::create_cluster() {
  tables_.customers_per_cluster.push_back(0);
  tables_.views_per_cluster.push_back(0);
  tables_.cluster_factor.emplace_back(num_factors(), 0);
  tables_.cluster_topic.emplace_back(num_topics(), 0);
  return num_clusters() - 1;
}

int ModelState::create_factor(double concentration, Rng& rng) {
  if (!(concentration > 0.0)) corrupt("new factor needs concentration > 0");
  tables_.customers_per_factor.push_back(0);
  tables_.factor_direction_sum.emplace_back();
  concentration_.push_back(concentration);
  for (auto& row : tables_.cluster_factor) row.push_back(0);
  const double b = rng.beta(1.0, hp_.alpha_location_base);
  const double w = location_sticks_.remainder * b;
  location_sticks_.weights.push_back(w);
  location_sticks_.remainder -= w;
  return num_factors() - 1;
}

int ModelState::create_topic(Rng& rng) {
  tables_.topic_items.emplace_back(hp_.catalog.catalog_size);
  for (auto& row : tables_.cluster_topic) row.push_back(0);
  const double b = rng.beta(1.0, hp_.alpha_topic_base);
  const double w = topic_sticks_.remainder * b;
  topic_sticks_.weights.push_back(w);
  topic_sticks_.remainder -= w;
  return num_topics() - 1;
}

void ModelState::add_customer(int d, int cluster, int factor) {
  if (cluster_of_[d] >= 0) corrupt("add_customer while already assigned");
  if (cluster < 0 || cluster >= num_clusters()) corrupt("add_customer: bad cluster");
  if (factor < 0 || factor >= num_factors()) corrupt("add_customer: bad factor");
  cluster_of_[d] = cluster;
  factor_of_[d] = factor;
  ++tables_.customers_per_cluster[cluster];
  ++tables_.cluster_factor[cluster][factor];
  ++tables_.customers_per_factor[factor];
  tables_.factor_direction_sum[factor].add(data_->customers[d].location.vec());
}

void ModelState::remove_customer(int d) {
  const int t = cluster_of_[d];
  const int s = factor_of_[d];
  if (t < 0) corrupt("remove_customer on unassigned customer");
  if (s < 0) corrupt("remove_customer with location detached");
  if (views_clustered_[d]) {
    for (int z : topic_of_[d])
      if (z >= 0) corrupt("remove_customer with views still in cluster tables");
  }
  --tables_.customers_per_cluster[t];
  --tables_.cluster_factor[t][s];
  --tables_.customers_per_factor[s];
  tables_.factor_direction_sum[s].subtract(data_->customers[d].location.vec());
  cluster_of_[d] = -1;
  factor_of_[d] = -1;
  if (!defer_pruning_ && tables_.customers_per_cluster[t] == 0) prune_cluster(t);
}

void ModelState::add_view(int d, int j, int topic) {
  const int t = cluster_of_[d];
  if (t < 0) corrupt("add_view on unassigned customer");
  if (!views_clustered_[d]) corrupt("add_view while views detached from cluster");
  if (topic_of_[d][j] >= 0) corrupt("add_view on already-assigned view");
  if (topic < 0 || topic >= num_topics()) corrupt("add_view: bad topic");
  const int item = data_->customers[d].views[j];
  topic_of_[d][j] = topic;
  ++tables_.cluster_topic[t][topic];
  ++tables_.views_per_cluster[t];
  ++tables_.topic_items[topic].item_counts[item];
  ++tables_.topic_items[topic].total;
}

void ModelState::remove_view(int d, int j) {
  const int t = cluster_of_[d];
  const int z = topic_of_[d][j];
  if (t < 0) corrupt("remove_view on unassigned customer");
  if (!views_clustered_[d]) corrupt("remove_view while views detached from cluster");
  if (z < 0) corrupt("remove_view on unassigned view");
  const int item = data_->customers[d].views[j];
  --tables_.cluster_topic[t][z];
  --tables_.views_per_cluster[t];
  --tables_.topic_items[z].item_counts[item];
  --tables_.topic_items[z].total;
  topic_of_[d][j] = -1;
  if (!defer_pruning_ && tables_.topic_items[z].total == 0) prune_topic(z);
}

void ModelState::detach_location_deferred(int d) {
  const int t = cluster_of_[d];
  const int s = factor_of_[d];
  if (t < 0) corrupt("detach_location on unassigned customer");
  if (s < 0) corrupt("detach_location twice");
  --tables_.cluster_factor[t][s];
  --tables_.customers_per_factor[s];
  tables_.factor_direction_sum[s].subtract(data_->customers[d].location.vec());
  factor_of_[d] = -1;
}

void ModelState::detach_location(int d) {
  const int s = factor_of_[d];
  detach_location_deferred(d);
  prune_factor_if_empty(s);
}

void ModelState::prune_factor_if_empty(int factor) {
  if (defer_pruning_) return;
  if (factor < 0 || factor >= num_factors()) corrupt("prune_factor_if_empty: bad factor");
  if (tables_.customers_per_factor[factor] == 0) prune_factor(factor);
}

void ModelState::attach_location(int d, int factor) {
  const int t = cluster_of_[d];
  if (t < 0) corrupt("attach_location on unassigned customer");
  if (factor_of_[d] >= 0) corrupt("attach_location while already attached");
  if (factor < 0 || factor >= num_factors()) corrupt("attach_location: bad factor");
  factor_of_[d] = factor;
  ++tables_.cluster_factor[t][factor];
  ++tables_.customers_per_factor[factor];
  tables_.factor_direction_sum[factor].add(data_->customers[d].location.vec());
}

void ModelState::detach_views_from_cluster(int d) {
  const int t = cluster_of_[d];
  if (t < 0) corrupt("detach_views_from_cluster on unassigned customer");
  if (!views_clustered_[d]) corrupt("detach_views_from_cluster twice");
  for (int z : topic_of_[d]) {
    if (z < 0) continue;
    --tables_.cluster_topic[t][z];
    --tables_.views_per_cluster[t];
  }
  views_clustered_[d] = 0;
}

void ModelState::attach_views_to_cluster(int d) {
  const int t = cluster_of_[d];
  if (t < 0) corrupt("attach_views_to_cluster on unassigned customer");
  if (views_clustered_[d]) corrupt("attach_views_to_cluster while attached");
  for (int z : topic_of_[d]) {
    if (z < 0) continue;
    ++tables_.cluster_topic[t][z];
    ++tables_.views_per_cluster[t];
  }
  views_clustered_[d] = 1;
}

void ModelState::set_concentration(int s, double c) {
  if (!(c > 0.0)) corrupt("set_concentration: c must be > 0");
  concentration_[s] = c;
}

void ModelState::set_sticks(GlobalSticks location, GlobalSticks topic) {
  if (location.size() != num_factors() || topic.size() != num_topics())
    corrupt("set_sticks: size mismatch with live factors/topics");
  location_sticks_ = std::move(location);
  topic_sticks_ = std::move(topic);
}

void ModelState::resample_location_sticks(Rng& rng) {
  std::vector<double> mass(num_factors());
  for (int s = 0; s < num_factors(); ++s)
    mass[s] = hp_.alpha_location * location_sticks_.weights[s];
  location_sticks_ =
      resample_sticks(tables_.cluster_factor, mass, hp_.alpha_location_base, rng);
}

void ModelState::resample_topic_sticks(Rng& rng) {
  std::vector<double> mass(num_topics());
  for (int z = 0; z < num_topics(); ++z)
    mass[z] = hp_.alpha_topic * topic_sticks_.weights[z];
  topic_sticks_ =
      resample_sticks(tables_.cluster_topic, mass, hp_.alpha_topic_base, rng);
}

void ModelState::prune_cluster(int t) {
  const int last = num_clusters() - 1;
  if (tables_.views_per_cluster[t] != 0)
    corrupt("pruning cluster that still owns views");
  if (t != last) {
    tables_.customers_per_cluster[t] = tables_.customers_per_cluster[last];
    tables_.views_per_cluster[t] = tables_.views_per_cluster[last];
    tables_.cluster_factor[t] = std::move(tables_.cluster_factor[last]);
    tables_.cluster_topic[t] = std::move(tables_.cluster_topic[last]);
    for (int& c : cluster_of_)
      if (c == last) c = t;
  }
  tables_.customers_per_cluster.pop_back();
  tables_.views_per_cluster.pop_back();
  tables_.cluster_factor.pop_back();
  tables_.cluster_topic.pop_back();
}

void ModelState::prune_factor(int s) {
  const int last = num_factors() - 1;
  // Dead atom's stick mass rejoins the unrepresented pool.
  location_sticks_.remainder += location_sticks_.weights[s];
  if (s != last) {
    location_sticks_.weights[s] = location_sticks_.weights[last];
    tables_.customers_per_factor[s] = tables_.customers_per_factor[last];
    tables_.factor_direction_sum[s] = tables_.factor_direction_sum[last];
    concentration_[s] = concentration_[last];
    for (auto& row : tables_.cluster_factor) row[s] = row[last];
    for (int& f : factor_of_)
      if (f == last) f = s;
  }
  location_sticks_.weights.pop_back();
  tables_.customers_per_factor.pop_back();
  tables_.factor_direction_sum.pop_back();
  concentration_.pop_back();
  for (auto& row : tables_.cluster_factor) row.pop_back();
}

void ModelState::prune_topic(int z) {
  const int last = num_topics() - 1;
  topic_sticks_.remainder += topic_sticks_.weights[z];
  if (z != last) {
    topic_sticks_.weights[z] = topic_sticks_.weights[last];
    tables_.topic_items[z] = std::move(tables_.topic_items[last]);
    for (auto& row : tables_.cluster_topic) row[z] = row[last];
    for (auto& per_customer : topic_of_)
      for (int& zz : per_customer)
        if (zz == last) zz = z;
  }
  topic_sticks_.weights.pop_back();
  tables_.topic_items.pop_back();
  for (auto& row : tables_.cluster_topic) row.pop_back();
}

void ModelState::prune_all_empty() {
  for (int t = num_clusters() - 1; t >= 0; --t)
    if (tables_.customers_per_cluster[t] == 0) prune_cluster(t);
  for (int s = num_factors() - 1; s >= 0; --s)
    if (tables_.customers_per_factor[s] == 0) prune_factor(s);
  for (int z = num_topics() - 1; z >= 0; --z)
    if (tables_.topic_items[z].total == 0) prune_topic(z);
}

CountTables ModelState::recompute_tables() const {
  CountTables fresh;
  fresh.customers_per_cluster.assign(num_clusters(), 0);
  fresh.views_per_cluster.assign(num_clusters(), 0);
  fresh.cluster_factor.assign(num_clusters(),
                              std::vector<std::int64_t>(num_factors(), 0));
  fresh.cluster_topic.assign(num_clusters(),
                             std::vector<std::int64_t>(num_topics(), 0));
  fresh.customers_per_factor.assign(num_factors(), 0);
  fresh.factor_direction_sum.assign(num_factors(), CompensatedVec3{});
  fresh.topic_items.assign(num_topics(), TopicCounts(hp_.catalog.catalog_size));

  for (int d = 0; d < num_customers(); ++d) {
    const int t = cluster_of_[d];
    const int s = factor_of_[d];
    if (t >= 0) {
      ++fresh.customers_per_cluster[t];
      if (s >= 0) {
        ++fresh.cluster_factor[t][s];
        ++fresh.customers_per_factor[s];
        fresh.factor_direction_sum[s].add(data_->customers[d].location.vec());
      }
    }
    const auto& views = data_->customers[d].views;
    for (std::size_t j = 0; j < views.size(); ++j) {
      const int z = topic_of_[d][j];
      if (z < 0) continue;
      ++fresh.topic_items[z].item_counts[views[j]];
      ++fresh.topic_items[z].total;
      if (t >= 0 && views_clustered_[d]) {
        ++fresh.cluster_topic[t][z];
        ++fresh.views_per_cluster[t];
      }
    }
  }
  return fresh;
}

void ModelState::audit(double direction_tol) const {
  const CountTables fresh = recompute_tables();
  auto fail = [&](const std::string& what) { corrupt("audit: " + what); };
  if (fresh.customers_per_cluster != tables_.customers_per_cluster)
    fail("customers_per_cluster drifted");
  if (fresh.views_per_cluster != tables_.views_per_cluster)
    fail("views_per_cluster drifted");
  if (fresh.cluster_factor != tables_.cluster_factor)
    fail("cluster_factor drifted");
  if (fresh.cluster_topic != tables_.cluster_topic)
    fail("cluster_topic drifted");
  if (fresh.customers_per_factor != tables_.customers_per_factor)
    fail("customers_per_factor drifted");
  if (fresh.topic_items != tables_.topic_items) fail("topic_items drifted");
  for (int s = 0; s < num_factors(); ++s) {
    const Vec3 a = tables_.factor_direction_sum[s].value();
    const Vec3 b = fresh.factor_direction_sum[s].value();
    const Vec3 diff = a - b;
    if (std::abs(diff.x) > direction_tol || std::abs(diff.y) > direction_tol ||
        std::abs(diff.z) > direction_tol)
      fail("factor_direction_sum drifted beyond tolerance");
    if (a.norm() > static_cast<double>(tables_.customers_per_factor[s]) + 1e-9)
      fail("direction sum norm exceeds member count");
  }
  if (std::abs(location_sticks_.total() - 1.0) > 1e-12)
    fail("location sticks do not sum to 1");
  if (std::abs(topic_sticks_.total() - 1.0) > 1e-12)
    fail("topic sticks do not sum to 1");
  if (location_sticks_.size() != num_factors())
    fail("location stick count mismatch");
  if (topic_sticks_.size() != num_topics()) fail("topic stick count mismatch");
}

void ModelState::recompute_direction_sums() {
  CountTables fresh = recompute_tables();
  tables_.factor_direction_sum = std::move(fresh.factor_direction_sum);
}

void ModelState::refresh_data_tables() {
  CountTables fresh = recompute_tables();
  tables_.factor_direction_sum = std::move(fresh.factor_direction_sum);
  tables_.topic_items = std::move(fresh.topic_items);
}

void ModelState::load_assignments(std::vector<int> cluster,
                                  std::vector<int> factor,
                                  std::vector<std::vector<int>> topics,
                                  std::vector<double> concentrations) {
  const int n = num_customers();
  if (static_cast<int>(cluster.size()) != n ||
      static_cast<int>(factor.size()) != n ||
      static_cast<int>(topics.size()) != n)
    corrupt("load_assignments: assignment arrays do not match dataset size");
  int num_t = 0, num_s = 0, num_z = 0;
  for (int d = 0; d < n; ++d) {
    if (cluster[d] < 0 || factor[d] < 0)
      corrupt("load_assignments: every customer must be assigned");
    num_t = std::max(num_t, cluster[d] + 1);
    num_s = std::max(num_s, factor[d] + 1);
    if (topics[d].size() != data_->customers[d].views.size())
      corrupt("load_assignments: view/topic length mismatch");
    for (int z : topics[d]) {
      if (z < 0) corrupt("load_assignments: every view must have a topic");
      num_z = std::max(num_z, z + 1);
    }
  }
  if (static_cast<int>(concentrations.size()) != num_s)
    corrupt("load_assignments: concentration count must equal factor count");
  for (double c : concentrations)
    if (!(c > 0.0)) corrupt("load_assignments: concentrations must be > 0");

  cluster_of_ = std::move(cluster);
  factor_of_ = std::move(factor);
  topic_of_ = std::move(topics);
  concentration_ = std::move(concentrations);
  views_clustered_.assign(n, 1);

  tables_ = CountTables{};
  tables_.customers_per_cluster.assign(num_t, 0);
  tables_.views_per_cluster.assign(num_t, 0);
  tables_.cluster_factor.assign(num_t, std::vector<std::int64_t>(num_s, 0));
  tables_.cluster_topic.assign(num_t, std::vector<std::int64_t>(num_z, 0));
  tables_.customers_per_factor.assign(num_s, 0);
  tables_.factor_direction_sum.assign(num_s, CompensatedVec3{});
  tables_.topic_items.assign(num_z, TopicCounts(hp_.catalog.catalog_size));
  tables_ = recompute_tables();

  for (std::int64_t c : tables_.customers_per_cluster)
    if (c == 0) corrupt("load_assignments: empty cluster index");
  for (std::int64_t c : tables_.customers_per_factor)
    if (c == 0) corrupt("load_assignments: empty factor index");
  for (const auto& tc : tables_.topic_items)
    if (tc.total == 0) corrupt("load_assignments: empty topic index");

  // Count-proportional placeholder sticks keep the state audit-consistent;
  // callers with real sticks (checkpoint load, exact initialization)
  // overwrite them via set_sticks.
  auto placeholder = [](const std::vector<std::int64_t>& counts, double alpha) {
    GlobalSticks gs;
    double total = alpha;
    for (std::int64_t c : counts) total += static_cast<double>(c);
    gs.weights.resize(counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k)
      gs.weights[k] = static_cast<double>(counts[k]) / total;
    gs.remainder = alpha / total;
    const double norm = gs.total();
    for (double& w : gs.weights) w /= norm;
    gs.remainder /= norm;
    return gs;
  };
  std::vector<std::int64_t> topic_totals(num_z);
  for (int z = 0; z < num_z; ++z) topic_totals[z] = tables_.topic_items[z].total;
  location_sticks_ =
      placeholder(tables_.customers_per_factor, hp_.alpha_location_base);
  topic_sticks_ = placeholder(topic_totals, hp_.alpha_topic_base);
}

}  // namespace geotopics
