// Apache License, Version 2.0, refer to LICENSE.txt

#include "geotopics/io.hpp"

#include <unordered_set>

#include "geotopics/error.hpp"
#include "geotopics/geo.hpp"
#include "json.hpp"

namespace geotopics {

using nlohmann::json;

namespace {

[[noreturn]] void data_fail(std::size_t line, const std::string& what) {
  throw DataError("line " + std::to_string(line) + ": " + what);
}

bool blank(const std::string& s) {
  return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

}  // namespace

Dataset ingest(const std::string& path, int catalog_size) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path);
  Dataset data;
  std::unordered_set<std::string> seen_ids;
  int max_item = -1;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      data_fail(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!rec.is_object()) data_fail(line_no, "record is not a JSON object");
    for (const char* field : {"customer_id", "lat", "lon", "videos"})
      if (!rec.contains(field))
        data_fail(line_no, std::string("missing field \"") + field + "\"");
    if (!rec["customer_id"].is_string())
      data_fail(line_no, "customer_id must be a string");
    if (!rec["lat"].is_number() || !rec["lon"].is_number())
      data_fail(line_no, "lat/lon must be numbers");
    if (!rec["videos"].is_array())
      data_fail(line_no, "videos must be an array");

    Customer cust;
    cust.id = rec["customer_id"].get<std::string>();
    if (!seen_ids.insert(cust.id).second)
      data_fail(line_no, "duplicate customer_id \"" + cust.id + "\"");
    try {
      cust.location = latlon_to_unit(
          make_geo_point(rec["lat"].get<double>(), rec["lon"].get<double>()));
    } catch (const InvalidCoordinateError& e) {
      data_fail(line_no, e.what());
    }
    for (const auto& v : rec["videos"]) {
      if (!v.is_number_integer())
        data_fail(line_no, "videos entries must be integers");
      const long long item = v.get<long long>();
      if (item < 0) data_fail(line_no, "negative item index");
      if (catalog_size > 0 && item >= catalog_size)
        data_fail(line_no, "item index " + std::to_string(item) +
                               " >= catalog size " +
                               std::to_string(catalog_size));
      max_item = std::max(max_item, static_cast<int>(item));
      cust.views.push_back(static_cast<int>(item));
    }
    data.customers.push_back(std::move(cust));
  }
  if (catalog_size > 0) {
    data.catalog_size = catalog_size;
  } else {
    if (max_item < 0)
      throw DataError("catalog size not given and no views to infer it from");
    data.catalog_size = max_item + 1;
  }
  return data;
}

void write_dataset_jsonl(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  for (const auto& cust : data.customers) {
    const GeoPoint p = unit_to_latlon(cust.location);
    json rec{{"customer_id", cust.id},
             {"lat", p.lat},
             {"lon", p.lon},
             {"videos", cust.views}};
    out << rec.dump() << "\n";
  }
}

void write_ground_truth(const GroundTruth& truth, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  json factors = json::array();
  for (const auto& p : truth.factor_params) {
    const GeoPoint g = unit_to_latlon(p.mu);
    factors.push_back({{"lat", g.lat}, {"lon", g.lon}, {"c", p.c}});
  }
  json j{{"cluster", truth.cluster},
         {"factor", truth.factor},
         {"topic", truth.topic},
         {"factor_params", factors},
         {"topic_item_probs", truth.topic_item_probs},
         {"factor_table_counts", truth.factor_table_counts},
         {"topic_table_counts", truth.topic_table_counts}};
  out << j.dump(2) << "\n";
}

GroundTruth read_ground_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open ground-truth file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw DataError(std::string("malformed ground-truth JSON: ") + e.what());
  }
  GroundTruth truth;
  truth.cluster = j.at("cluster").get<std::vector<int>>();
  truth.factor = j.at("factor").get<std::vector<int>>();
  truth.topic = j.at("topic").get<std::vector<std::vector<int>>>();
  for (const auto& f : j.at("factor_params"))
    truth.factor_params.push_back(
        {latlon_to_unit(make_geo_point(f.at("lat").get<double>(),
                                       f.at("lon").get<double>())),
         f.at("c").get<double>()});
  truth.topic_item_probs =
      j.at("topic_item_probs").get<std::vector<std::vector<double>>>();
  if (j.contains("factor_table_counts"))
    truth.factor_table_counts =
        j.at("factor_table_counts").get<std::vector<std::int64_t>>();
  if (j.contains("topic_table_counts"))
    truth.topic_table_counts =
        j.at("topic_table_counts").get<std::vector<std::int64_t>>();
  return truth;
}

std::vector<std::string> read_catalog_titles(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open catalog file: " + path);
  std::vector<std::string> titles;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      data_fail(line_no, "catalog line is not id<TAB>title");
    int id = 0;
    try {
      id = std::stoi(line.substr(0, tab));
    } catch (...) {
      data_fail(line_no, "catalog id is not an integer");
    }
    if (id < 0) data_fail(line_no, "catalog id is negative");
    if (id >= static_cast<int>(titles.size())) titles.resize(id + 1);
    titles[id] = line.substr(tab + 1);
  }
  return titles;
}

namespace {

json hyper_to_json(const Hyperparams& hp) {
  const Vec3& mu0 = hp.location_prior.mu0.vec();
  return json{{"alpha_interaction", hp.alpha_interaction},
              {"alpha_location", hp.alpha_location},
              {"alpha_topic", hp.alpha_topic},
              {"alpha_location_base", hp.alpha_location_base},
              {"alpha_topic_base", hp.alpha_topic_base},
              {"catalog_size", hp.catalog.catalog_size},
              {"gamma", hp.catalog.gamma},
              {"mu0", {mu0.x, mu0.y, mu0.z}},
              {"c0", hp.location_prior.c0},
              {"c_log_mean", hp.location_prior.c_log_mean},
              {"c_log_sd", hp.location_prior.c_log_sd}};
}

Hyperparams hyper_from_json(const json& j) {
  Hyperparams hp;
  hp.alpha_interaction = j.at("alpha_interaction").get<double>();
  hp.alpha_location = j.at("alpha_location").get<double>();
  hp.alpha_topic = j.at("alpha_topic").get<double>();
  hp.alpha_location_base = j.at("alpha_location_base").get<double>();
  hp.alpha_topic_base = j.at("alpha_topic_base").get<double>();
  hp.catalog = CatalogParams::from_gamma(j.at("gamma").get<std::vector<double>>());
  if (hp.catalog.catalog_size != j.at("catalog_size").get<int>())
    throw DataError("checkpoint: gamma length disagrees with catalog_size");
  const auto mu0 = j.at("mu0").get<std::vector<double>>();
  if (mu0.size() != 3) throw DataError("checkpoint: mu0 must have 3 entries");
  hp.location_prior.mu0 = UnitVec3::from(Vec3{mu0[0], mu0[1], mu0[2]});
  hp.location_prior.c0 = j.at("c0").get<double>();
  hp.location_prior.c_log_mean = j.at("c_log_mean").get<double>();
  hp.location_prior.c_log_sd = j.at("c_log_sd").get<double>();
  return hp;
}

json sticks_to_json(const GlobalSticks& gs) {
  return json{{"weights", gs.weights}, {"remainder", gs.remainder}};
}

GlobalSticks sticks_from_json(const json& j) {
  GlobalSticks gs;
  gs.weights = j.at("weights").get<std::vector<double>>();
  gs.remainder = j.at("remainder").get<double>();
  return gs;
}

}  // namespace

Checkpoint make_checkpoint(const ModelState& state, const GibbsSampler& sampler,
                           const Rng& rng) {
  Checkpoint ckpt;
  ckpt.sweeps_completed = sampler.sweeps_completed();
  ckpt.hyper = state.hyper();
  ckpt.cluster = state.cluster_assignments();
  ckpt.factor = state.factor_assignments();
  ckpt.topics = state.topic_assignments();
  ckpt.concentrations = state.concentrations();
  ckpt.location_sticks = state.location_sticks();
  ckpt.topic_sticks = state.topic_sticks();
  ckpt.rng_state = rng.serialize();
  ckpt.mh_step_sigma = sampler.current_mh_step_sigma();
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  json j{{"format_version", ckpt.format_version},
         {"sweeps_completed", ckpt.sweeps_completed},
         {"hyperparams", hyper_to_json(ckpt.hyper)},
         {"cluster", ckpt.cluster},
         {"factor", ckpt.factor},
         {"topics", ckpt.topics},
         {"concentrations", ckpt.concentrations},
         {"location_sticks", sticks_to_json(ckpt.location_sticks)},
         {"topic_sticks", sticks_to_json(ckpt.topic_sticks)},
         {"rng_state", ckpt.rng_state},
         {"mh_step_sigma", ckpt.mh_step_sigma}};
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw DataError(std::string("malformed checkpoint JSON: ") + e.what());
  }
  Checkpoint ckpt;
  ckpt.format_version = j.at("format_version").get<int>();
  if (ckpt.format_version != 1)
    throw DataError("unsupported checkpoint format version " +
                    std::to_string(ckpt.format_version));
  ckpt.sweeps_completed = j.at("sweeps_completed").get<int>();
  ckpt.hyper = hyper_from_json(j.at("hyperparams"));
  ckpt.cluster = j.at("cluster").get<std::vector<int>>();
  ckpt.factor = j.at("factor").get<std::vector<int>>();
  ckpt.topics = j.at("topics").get<std::vector<std::vector<int>>>();
  ckpt.concentrations = j.at("concentrations").get<std::vector<double>>();
  ckpt.location_sticks = sticks_from_json(j.at("location_sticks"));
  ckpt.topic_sticks = sticks_from_json(j.at("topic_sticks"));
  ckpt.rng_state = j.at("rng_state").get<std::string>();
  ckpt.mh_step_sigma = j.at("mh_step_sigma").get<double>();
  return ckpt;
}

void install_checkpoint(const Checkpoint& ckpt, ModelState& state,
                        GibbsSampler& sampler, Rng& rng) {
  state.load_assignments(ckpt.cluster, ckpt.factor, ckpt.topics,
                         ckpt.concentrations);
  state.set_sticks(ckpt.location_sticks, ckpt.topic_sticks);
  state.audit();
  sampler.set_sweeps_completed(ckpt.sweeps_completed);
  rng.deserialize(ckpt.rng_state);
}

JsonlWriter::JsonlWriter(const std::string& path, bool append)
    : out_(path, append ? std::ios::app : std::ios::out) {
  if (!out_) throw DataError("cannot open diagnostics file: " + path);
}

void JsonlWriter::write_line(const std::string& json_line) {
  out_ << json_line << "\n";
  out_.flush();
}

std::string sweep_record_json(int sweep, const SweepDiagnostics& d) {
  json j{{"sweep", sweep},
         {"log_joint", d.log_joint},
         {"num_clusters", d.num_clusters},
         {"num_factors", d.num_factors},
         {"num_topics", d.num_topics},
         {"mh_acceptance_rate", d.mh_acceptance_rate}};
  return j.dump();
}

}  // namespace geotopics
