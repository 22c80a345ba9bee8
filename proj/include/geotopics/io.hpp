// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "geotopics/sampler.hpp"
#include "geotopics/state.hpp"
#include "geotopics/synth.hpp"

namespace geotopics {

/// Reads one JSONL customer record per line:
///   {"customer_id": str, "lat": num, "lon": num, "videos": [int, ...]}
/// catalog_size 0 infers V as max index + 1. Malformed lines raise DataError
/// with the offending line number; duplicate customer ids are rejected.
Dataset ingest(const std::string& path, int catalog_size = 0);

void write_dataset_jsonl(const Dataset& data, const std::string& path);

void write_ground_truth(const GroundTruth& truth, const std::string& path);
GroundTruth read_ground_truth(const std::string& path);

/// Optional catalog enrichment: one "id<TAB>title" per line.
std::vector<std::string> read_catalog_titles(const std::string& path);

/// Versioned single-file JSON snapshot of a run. Count tables are not
/// stored; they are rebuilt from the assignments on load and audited.
struct Checkpoint {
  int format_version = 1;
  int sweeps_completed = 0;
  Hyperparams hyper;
  std::vector<int> cluster;
  std::vector<int> factor;
  std::vector<std::vector<int>> topics;
  std::vector<double> concentrations;
  GlobalSticks location_sticks;
  GlobalSticks topic_sticks;
  std::string rng_state;
  double mh_step_sigma = 0.5;
};

Checkpoint make_checkpoint(const ModelState& state, const GibbsSampler& sampler,
                           const Rng& rng);
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

/// Installs a checkpoint into a state bound to the same dataset; restores
/// the rng stream and sweep counter, then audits.
void install_checkpoint(const Checkpoint& ckpt, ModelState& state,
                        GibbsSampler& sampler, Rng& rng);

/// Line-buffered JSONL sink for per-sweep / per-epoch diagnostics.
class JsonlWriter {
 public:
  explicit JsonlWriter(const std::string& path, bool append = false);
  void write_line(const std::string& json_line);

 private:
  std::ofstream out_;
};

std::string sweep_record_json(int sweep, const SweepDiagnostics& d);

}  // namespace geotopics
