// Apache License, Version 2.0, refer to LICENSE.txt

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "geotopics/error.hpp"
#include "geotopics/io.hpp"
#include "support/fixtures.hpp"

using namespace geotopics;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("geotopics-test-" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream oss;
  oss << in.rdbuf();
  return oss.str();
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("ingest a well-formed file and infer the catalog") {
  TempDir tmp;
  const std::string p = tmp.file("data.jsonl");
  write_file(p,
             R"({"customer_id": "a", "lat": 10.5, "lon": -20.25, "videos": [0, 3, 3]})"
             "\n"
             R"({"customer_id": "b", "lat": -45.0, "lon": 170.0, "videos": []})"
             "\n"
             "\n"
             R"({"customer_id": "c", "lat": 0.0, "lon": 0.0, "videos": [7]})"
             "\n");
  const Dataset data = ingest(p);
  REQUIRE(data.num_customers() == 3);
  CHECK(data.catalog_size == 8);  // max index + 1
  CHECK(data.customers[0].views == std::vector<int>{0, 3, 3});
  CHECK(data.customers[1].views.empty());
  CHECK(data.customers[2].location.x() == doctest::Approx(1.0));
}

TEST_CASE("ingest rejections carry line numbers") {
  TempDir tmp;
  const std::string p = tmp.file("bad.jsonl");

  SUBCASE("latitude out of range") {
    write_file(p,
               R"({"customer_id": "a", "lat": 1.0, "lon": 2.0, "videos": [0]})"
               "\n"
               R"({"customer_id": "b", "lat": 91.0, "lon": 0.0, "videos": [0]})"
               "\n");
    try {
      ingest(p);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }
  SUBCASE("missing field") {
    write_file(p, R"({"customer_id": "a", "lat": 1.0, "videos": [0]})" "\n");
    CHECK_THROWS_AS(ingest(p), DataError);
  }
  SUBCASE("negative item") {
    write_file(p, R"({"customer_id": "a", "lat": 1.0, "lon": 2.0, "videos": [-1]})" "\n");
    CHECK_THROWS_AS(ingest(p), DataError);
  }
  SUBCASE("item beyond explicit catalog") {
    write_file(p, R"({"customer_id": "a", "lat": 1.0, "lon": 2.0, "videos": [5]})" "\n");
    CHECK_THROWS_AS(ingest(p, 5), DataError);
  }
  SUBCASE("duplicate customer id") {
    write_file(p,
               R"({"customer_id": "a", "lat": 1.0, "lon": 2.0, "videos": [0]})"
               "\n"
               R"({"customer_id": "a", "lat": 3.0, "lon": 4.0, "videos": [1]})"
               "\n");
    CHECK_THROWS_AS(ingest(p), DataError);
  }
  SUBCASE("malformed JSON") {
    write_file(p, "{not json}\n");
    CHECK_THROWS_AS(ingest(p), DataError);
  }
  SUBCASE("no views and no catalog size") {
    write_file(p, R"({"customer_id": "a", "lat": 1.0, "lon": 2.0, "videos": []})" "\n");
    CHECK_THROWS_AS(ingest(p), DataError);
    CHECK(ingest(p, 4).catalog_size == 4);
  }
}

TEST_CASE("dataset round trip through JSONL") {
  TempDir tmp;
  Rng rng(3);
  Dataset data = testfix::make_dataset(12, 5, 3.0, rng);
  const std::string p = tmp.file("round.jsonl");
  write_dataset_jsonl(data, p);
  const Dataset back = ingest(p, 5);
  REQUIRE(back.num_customers() == 12);
  for (int d = 0; d < 12; ++d) {
    CHECK(back.customers[d].id == data.customers[d].id);
    CHECK(back.customers[d].views == data.customers[d].views);
    CHECK(back.customers[d].location.x() ==
          doctest::Approx(data.customers[d].location.x()).epsilon(1e-12));
  }
}

TEST_CASE("checkpoint save/load/save is byte-identical and audits clean") {
  TempDir tmp;
  Rng rng(4);
  Dataset data = testfix::make_dataset(15, 4, 3.0, rng);
  ModelState st(&data, testfix::make_hyper(4));
  SamplerConfig cfg;
  GibbsSampler smp(st, cfg);
  smp.initialize(rng);
  for (int k = 0; k < 5; ++k) smp.sweep(rng);

  const std::string p1 = tmp.file("ckpt1.json");
  const std::string p2 = tmp.file("ckpt2.json");
  save_checkpoint(make_checkpoint(st, smp, rng), p1);
  const Checkpoint loaded = load_checkpoint(p1);
  save_checkpoint(loaded, p2);
  CHECK(slurp(p1) == slurp(p2));

  ModelState st2(&data, loaded.hyper);
  GibbsSampler smp2(st2, cfg);
  Rng rng2(0);
  install_checkpoint(loaded, st2, smp2, rng2);
  st2.audit();
  CHECK(st2.cluster_assignments() == st.cluster_assignments());
  CHECK(smp2.sweeps_completed() == 5);

  // The restored rng continues the identical stream.
  CHECK(rng2.next_u64() == rng.next_u64());
}

TEST_CASE("checkpoint version mismatch is rejected") {
  TempDir tmp;
  Rng rng(5);
  Dataset data = testfix::make_dataset(4, 3, 2.0, rng);
  ModelState st(&data, testfix::make_hyper(3));
  GibbsSampler smp(st, SamplerConfig{});
  smp.initialize(rng);
  const std::string p = tmp.file("ckpt.json");
  save_checkpoint(make_checkpoint(st, smp, rng), p);
  std::string text = slurp(p);
  const auto at = text.find("\"format_version\": 1");
  REQUIRE(at != std::string::npos);
  text.replace(at, std::string("\"format_version\": 1").size(),
               "\"format_version\": 9");
  write_file(p, text);
  CHECK_THROWS_AS(load_checkpoint(p), DataError);
}

TEST_CASE("ground truth round trip") {
  TempDir tmp;
  GroundTruth truth;
  truth.cluster = {0, 0, 1};
  truth.factor = {0, 1, 1};
  truth.topic = {{0}, {}, {1, 0}};
  truth.factor_params = {
      {latlon_to_unit(make_geo_point(10.0, 20.0)), 5.0},
      {latlon_to_unit(make_geo_point(-30.0, 40.0)), 2.0}};
  truth.topic_item_probs = {{0.5, 0.5}, {0.9, 0.1}};
  truth.factor_table_counts = {2, 1};
  truth.topic_table_counts = {1, 1};
  const std::string p = tmp.file("truth.json");
  write_ground_truth(truth, p);
  const GroundTruth back = read_ground_truth(p);
  CHECK(back.cluster == truth.cluster);
  CHECK(back.factor == truth.factor);
  CHECK(back.topic == truth.topic);
  REQUIRE(back.factor_params.size() == 2);
  CHECK(back.factor_params[0].c == doctest::Approx(5.0));
  CHECK(back.factor_table_counts == truth.factor_table_counts);
}

TEST_CASE("catalog titles") {
  TempDir tmp;
  const std::string p = tmp.file("catalog.tsv");
  write_file(p, "0\tFirst Show\n2\tThird Show\n");
  const auto titles = read_catalog_titles(p);
  REQUIRE(titles.size() == 3);
  CHECK(titles[0] == "First Show");
  CHECK(titles[1].empty());
  CHECK(titles[2] == "Third Show");
  write_file(p, "zero\tbad\n");
  CHECK_THROWS_AS(read_catalog_titles(p), DataError);
}

TEST_CASE("sweep records are one-line JSON") {
  const SweepDiagnostics d{-12.5, 2, 3, 4, 0.45};
  const std::string line = sweep_record_json(7, d);
  CHECK(line.find('\n') == std::string::npos);
  CHECK(line.find("\"sweep\":7") != std::string::npos);
  CHECK(line.find("log_joint") != std::string::npos);
}

}  // TEST_SUITE
