// Apache License, Version 2.0, refer to LICENSE.txt
//
// geotopics: joint nonparametric clustering of item-view histories and
// geographic locations, trained by collapsed Gibbs sampling.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "geotopics/error.hpp"
#include "geotopics/eval.hpp"
#include "geotopics/io.hpp"
#include "geotopics/parallel.hpp"
#include "geotopics/sampler.hpp"
#include "geotopics/state.hpp"
#include "geotopics/synth.hpp"

namespace gt = geotopics;
namespace fs = std::filesystem;

namespace {

struct Options {
  // model
  double alpha_interaction = 1.0;
  double alpha_location = 1.0;
  double alpha_topic = 1.0;
  double alpha_location_base = 1.0;
  double alpha_topic_base = 1.0;
  double gamma = 0.1;
  int catalog_size = 0;  // 0 = infer from data
  double mu0_lat = 0.0;
  double mu0_lon = 0.0;
  double c0 = 0.01;
  double c_log_mean = 2.302585092994046;  // log 10
  double c_log_sd = 1.0;
  // sampler
  double mh_step_sigma = 0.5;
  int sweeps_per_stick_resample = 1;
  int recount_interval = 100;
  std::uint64_t sweep_order_seed = 0;
  int tune_burnin_sweeps = 0;
  bool strict_paper_mode = false;
  // run
  std::string data_path;
  std::string heldout_path;
  std::string checkpoint_path;
  std::string truth_path;
  std::string catalog_path;
  std::string out_dir = ".";
  int sweeps = 100;
  int workers = 1;
  int sync_interval = 1;
  std::uint64_t seed = 12345;
  int checkpoint_every = 0;  // 0 = final only
  int top_k = 10;
  // synth
  int synth_customers = 200;
  double synth_views_mean = 20.0;
  int synth_fixed_views = -1;  // >= 0 switches to a fixed count
  int synth_truncation = 100;
  bool synth_crp = false;
};

void add_model_options(CLI::App* cmd, Options& opt) {
  cmd->set_config("--config", "", "run configuration file (key=value lines)");
  cmd->add_option("--alpha-interaction", opt.alpha_interaction,
                  "concentration of the DP over (location, topic) factor pairs");
  cmd->add_option("--alpha-location", opt.alpha_location,
                  "per-cluster location-factor DP concentration");
  cmd->add_option("--alpha-topic", opt.alpha_topic,
                  "per-cluster topic DP concentration");
  cmd->add_option("--alpha-location-base", opt.alpha_location_base,
                  "global location-factor DP concentration");
  cmd->add_option("--alpha-topic-base", opt.alpha_topic_base,
                  "global topic DP concentration");
  cmd->add_option("--gamma", opt.gamma, "symmetric Dirichlet pseudo-count");
  cmd->add_option("--catalog-size", opt.catalog_size,
                  "catalog size V (0 = infer from data)");
  cmd->add_option("--mu0-lat", opt.mu0_lat, "prior mean direction latitude");
  cmd->add_option("--mu0-lon", opt.mu0_lon, "prior mean direction longitude");
  cmd->add_option("--c0", opt.c0, "prior concentration on mean directions");
  cmd->add_option("--c-log-mean", opt.c_log_mean,
                  "mean of log concentration prior");
  cmd->add_option("--c-log-sd", opt.c_log_sd,
                  "sd of log concentration prior");
  cmd->add_option("--seed", opt.seed, "run seed; all randomness flows from it");
}

void add_sampler_options(CLI::App* cmd, Options& opt) {
  cmd->add_option("--mh-step-sigma", opt.mh_step_sigma,
                  "random-walk scale on log c");
  cmd->add_option("--sweeps-per-stick-resample", opt.sweeps_per_stick_resample,
                  "sweeps between global stick resamples");
  cmd->add_option("--recount-interval", opt.recount_interval,
                  "sweeps between direction-sum recomputations");
  cmd->add_option("--sweep-order-seed", opt.sweep_order_seed,
                  "customer permutation seed (0 = natural order)");
  cmd->add_option("--tune-burnin-sweeps", opt.tune_burnin_sweeps,
                  "MH step tuning window; 0 disables");
  cmd->add_flag("--strict-paper-mode", opt.strict_paper_mode,
                "use plain fixed-count products in the cluster conditional "
                "instead of the sequential predictive");
}

gt::Hyperparams build_hyper(const Options& opt, int inferred_catalog) {
  gt::Hyperparams hp;
  hp.alpha_interaction = opt.alpha_interaction;
  hp.alpha_location = opt.alpha_location;
  hp.alpha_topic = opt.alpha_topic;
  hp.alpha_location_base = opt.alpha_location_base;
  hp.alpha_topic_base = opt.alpha_topic_base;
  const int v = opt.catalog_size > 0 ? opt.catalog_size : inferred_catalog;
  if (v < 1)
    throw gt::ConfigError(
        "catalog size unknown: pass --catalog-size or provide data to infer it");
  if (!(opt.gamma > 0.0)) throw gt::ConfigError("--gamma must be > 0");
  hp.catalog = gt::CatalogParams::symmetric(v, opt.gamma);
  hp.location_prior.mu0 =
      gt::latlon_to_unit(gt::make_geo_point(opt.mu0_lat, opt.mu0_lon));
  hp.location_prior.c0 = opt.c0;
  hp.location_prior.c_log_mean = opt.c_log_mean;
  hp.location_prior.c_log_sd = opt.c_log_sd;
  hp.validate();
  return hp;
}

gt::SamplerConfig build_sampler_config(const Options& opt) {
  gt::SamplerConfig cfg;
  cfg.mh_step_sigma = opt.mh_step_sigma;
  cfg.sweeps_per_stick_resample = opt.sweeps_per_stick_resample;
  cfg.rng_seed = opt.seed;
  cfg.recount_interval = opt.recount_interval;
  cfg.strict_literal_weights = opt.strict_paper_mode;
  cfg.sweep_order_seed = opt.sweep_order_seed;
  cfg.tune_burnin_sweeps = opt.tune_burnin_sweeps;
  std::vector<std::string> problems;
  if (!(cfg.mh_step_sigma >= 0.0)) problems.push_back("mh-step-sigma must be >= 0");
  if (cfg.sweeps_per_stick_resample < 1)
    problems.push_back("sweeps-per-stick-resample must be >= 1");
  if (cfg.recount_interval < 1) problems.push_back("recount-interval must be >= 1");
  if (!problems.empty()) {
    std::string msg = "invalid sampler config:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw gt::ConfigError(msg);
  }
  return cfg;
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw gt::ConfigError("cannot create output directory " + dir);
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void warn_acceptance(double rate) {
  if (rate < 0.15 || rate > 0.6)
    std::cerr << "note: concentration MH acceptance rate " << rate
              << " outside [0.15, 0.6]; consider adjusting --mh-step-sigma\n";
}

int run_training_loop(gt::GibbsSampler& sampler, gt::Rng& rng,
                      const Options& opt, int target_sweeps, bool append_diag) {
  gt::JsonlWriter diag(join_path(opt.out_dir, "diagnostics.jsonl"), append_diag);
  const std::string ckpt_path = join_path(opt.out_dir, "checkpoint.json");
  gt::MergePolicy policy{opt.sync_interval};
  const int todo = target_sweeps - sampler.sweeps_completed();
  double last_rate = 1.0;
  if (todo > 0) {
    gt::run_parallel(
        sampler, policy, opt.workers, todo, opt.seed, rng,
        [&](const gt::EpochRecord& rec) {
          gt::SweepDiagnostics d{rec.log_joint, rec.num_clusters,
                                 rec.num_factors, rec.num_topics,
                                 rec.mh_acceptance_rate};
          diag.write_line(gt::sweep_record_json(rec.sweeps_completed, d));
          last_rate = rec.mh_acceptance_rate;
          if (rec.clamp_warnings > 0)
            std::cerr << "warning: merge clamped " << rec.clamp_warnings
                      << " negative count entries\n";
          if (opt.checkpoint_every > 0 &&
              rec.sweeps_completed % opt.checkpoint_every == 0)
            gt::save_checkpoint(
                gt::make_checkpoint(sampler.state(), sampler, rng), ckpt_path);
        });
    warn_acceptance(last_rate);
  }
  gt::save_checkpoint(gt::make_checkpoint(sampler.state(), sampler, rng),
                      ckpt_path);
  std::cout << "completed " << sampler.sweeps_completed() << " sweeps; state: "
            << sampler.state().num_clusters() << " clusters, "
            << sampler.state().num_factors() << " location factors, "
            << sampler.state().num_topics() << " topics\n";
  std::cout << "checkpoint: " << ckpt_path << "\n";
  return 0;
}

int cmd_train(const Options& opt) {
  if (opt.data_path.empty()) throw gt::ConfigError("train requires --data");
  if (opt.sweeps < 0) throw gt::ConfigError("--sweeps must be >= 0");
  if (opt.workers < 1) throw gt::ConfigError("--workers must be >= 1");
  ensure_out_dir(opt.out_dir);
  gt::Dataset data = gt::ingest(opt.data_path, opt.catalog_size);
  const gt::Hyperparams hp = build_hyper(opt, data.catalog_size);
  const gt::SamplerConfig cfg = build_sampler_config(opt);

  gt::ModelState state(&data, hp);
  gt::GibbsSampler sampler(state, cfg);
  gt::Rng rng(opt.seed);
  sampler.initialize(rng);
  const int rc = run_training_loop(sampler, rng, opt, opt.sweeps, false);
  if (rc == 0 && !opt.heldout_path.empty()) {
    gt::Dataset heldout = gt::ingest(opt.heldout_path, hp.catalog.catalog_size);
    const gt::HeldoutResult hr = gt::heldout_loglik(state, heldout);
    std::cout << "heldout per-view loglik " << hr.per_view_loglik
              << ", per-location loglik " << hr.per_location_loglik << "\n";
  }
  return rc;
}

int cmd_resume(const Options& opt) {
  if (opt.data_path.empty()) throw gt::ConfigError("resume requires --data");
  if (opt.checkpoint_path.empty())
    throw gt::ConfigError("resume requires --checkpoint");
  ensure_out_dir(opt.out_dir);
  const gt::Checkpoint ckpt = gt::load_checkpoint(opt.checkpoint_path);
  gt::Dataset data = gt::ingest(opt.data_path, ckpt.hyper.catalog.catalog_size);
  gt::SamplerConfig cfg = build_sampler_config(opt);
  cfg.mh_step_sigma = ckpt.mh_step_sigma;  // keep the (possibly tuned) step

  gt::ModelState state(&data, ckpt.hyper);
  gt::GibbsSampler sampler(state, cfg);
  gt::Rng rng(0);
  gt::install_checkpoint(ckpt, state, sampler, rng);
  if (opt.sweeps < sampler.sweeps_completed())
    throw gt::ConfigError("--sweeps is below the checkpoint's sweep count");
  return run_training_loop(sampler, rng, opt, opt.sweeps, true);
}

int cmd_generate(const Options& opt) {
  if (opt.catalog_size < 1)
    throw gt::ConfigError("generate requires --catalog-size");
  ensure_out_dir(opt.out_dir);
  const gt::Hyperparams hp = build_hyper(opt, 0);
  gt::SynthConfig scfg;
  scfg.num_customers = opt.synth_customers;
  scfg.views_mean = opt.synth_views_mean;
  if (opt.synth_fixed_views >= 0) {
    scfg.fixed_views = true;
    scfg.fixed_view_count = opt.synth_fixed_views;
  }
  scfg.truncation = opt.synth_truncation;
  scfg.seed = opt.seed;
  scfg.validate();

  gt::Rng rng(scfg.seed);
  auto [data, truth] = opt.synth_crp ? gt::generate_crp(hp, scfg, rng)
                                     : gt::generate(hp, scfg, rng);
  const std::string data_path = join_path(opt.out_dir, "data.jsonl");
  const std::string truth_path = join_path(opt.out_dir, "truth.json");
  gt::write_dataset_jsonl(data, data_path);
  gt::write_ground_truth(truth, truth_path);
  std::cout << "generated " << data.num_customers() << " customers, "
            << data.total_views() << " views, catalog " << data.catalog_size
            << "\n  data:  " << data_path << "\n  truth: " << truth_path
            << "\n";
  return 0;
}

// Rebuild a trained state from data + checkpoint.
struct LoadedRun {
  gt::Dataset data;
  gt::Checkpoint ckpt;
};

LoadedRun load_run(const Options& opt) {
  if (opt.data_path.empty()) throw gt::ConfigError("--data is required");
  if (opt.checkpoint_path.empty()) throw gt::ConfigError("--checkpoint is required");
  gt::Checkpoint ckpt = gt::load_checkpoint(opt.checkpoint_path);
  gt::Dataset data = gt::ingest(opt.data_path, ckpt.hyper.catalog.catalog_size);
  return {std::move(data), std::move(ckpt)};
}

int cmd_evaluate(const Options& opt) {
  if (opt.heldout_path.empty()) throw gt::ConfigError("evaluate requires --heldout");
  ensure_out_dir(opt.out_dir);
  LoadedRun run = load_run(opt);
  gt::ModelState state(&run.data, run.ckpt.hyper);
  gt::GibbsSampler sampler(state, build_sampler_config(opt));
  gt::Rng rng(0);
  gt::install_checkpoint(run.ckpt, state, sampler, rng);

  gt::Dataset heldout =
      gt::ingest(opt.heldout_path, run.ckpt.hyper.catalog.catalog_size);
  const gt::HeldoutResult hr = gt::heldout_loglik(state, heldout);

  gt::EvalReport report;
  report.heldout_loglik_per_view = hr.per_view_loglik;
  report.heldout_loglik_location = hr.per_location_loglik;
  if (!opt.truth_path.empty()) {
    const gt::GroundTruth truth = gt::read_ground_truth(opt.truth_path);
    report.ari_cluster =
        gt::adjusted_rand_index(state.cluster_assignments(), truth.cluster);
    report.ari_factor =
        gt::adjusted_rand_index(state.factor_assignments(), truth.factor);
    report.has_ari = true;
  }
  report.report = gt::summarize(state, opt.top_k);

  const std::string out_path = join_path(opt.out_dir, "eval.json");
  std::ofstream out(out_path);
  out << gt::eval_report_to_json(report);
  std::cout << "heldout per-view loglik " << hr.per_view_loglik
            << " (" << hr.num_views << " views)\n"
            << "heldout per-location loglik " << hr.per_location_loglik << " ("
            << hr.num_customers << " customers)\n";
  if (report.has_ari)
    std::cout << "ARI clusters " << report.ari_cluster << ", location factors "
              << report.ari_factor << "\n";
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int cmd_report(const Options& opt) {
  ensure_out_dir(opt.out_dir);
  LoadedRun run = load_run(opt);
  gt::ModelState state(&run.data, run.ckpt.hyper);
  gt::GibbsSampler sampler(state, build_sampler_config(opt));
  gt::Rng rng(0);
  gt::install_checkpoint(run.ckpt, state, sampler, rng);

  std::vector<std::string> titles;
  if (!opt.catalog_path.empty()) titles = gt::read_catalog_titles(opt.catalog_path);
  const gt::FactorReport report = gt::summarize(state, opt.top_k);

  const std::string json_path = join_path(opt.out_dir, "report.json");
  const std::string text_path = join_path(opt.out_dir, "report.txt");
  const std::string geo_path = join_path(opt.out_dir, "factors.geojson");
  std::ofstream(json_path) << gt::report_to_json(report, titles);
  std::ofstream(text_path) << gt::report_to_text(report, titles);
  std::ofstream(geo_path) << gt::report_to_geojson(report);
  std::cout << gt::report_to_text(report, titles);
  std::cout << "wrote " << json_path << ", " << text_path << ", " << geo_path
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "geotopics: nonparametric joint clustering of viewing histories and "
      "geographic locations"};
  app.require_subcommand(1);
  Options opt;

  CLI::App* train = app.add_subcommand("train", "fit the model to a dataset");
  add_model_options(train, opt);
  add_sampler_options(train, opt);
  train->add_option("--data", opt.data_path, "training data (JSONL)");
  train->add_option("--heldout", opt.heldout_path,
                    "optional held-out data to score after training");
  train->add_option("--sweeps", opt.sweeps, "total Gibbs sweeps");
  train->add_option("--workers", opt.workers, "parallel workers");
  train->add_option("--sync-interval", opt.sync_interval,
                    "local sweeps between merges (workers > 1)");
  train->add_option("--checkpoint-every", opt.checkpoint_every,
                    "checkpoint cadence in sweeps (0 = final only)");
  train->add_option("--out", opt.out_dir, "output directory");

  CLI::App* resume = app.add_subcommand("resume", "continue from a checkpoint");
  add_model_options(resume, opt);
  add_sampler_options(resume, opt);
  resume->add_option("--data", opt.data_path, "training data (JSONL)");
  resume->add_option("--checkpoint", opt.checkpoint_path, "checkpoint to resume");
  resume->add_option("--sweeps", opt.sweeps, "total sweep target");
  resume->add_option("--workers", opt.workers, "parallel workers");
  resume->add_option("--sync-interval", opt.sync_interval,
                     "local sweeps between merges (workers > 1)");
  resume->add_option("--checkpoint-every", opt.checkpoint_every,
                     "checkpoint cadence in sweeps");
  resume->add_option("--out", opt.out_dir, "output directory");

  CLI::App* generate =
      app.add_subcommand("generate", "forward-sample a synthetic dataset");
  add_model_options(generate, opt);
  generate->add_option("--synth-customers", opt.synth_customers,
                       "number of customers");
  generate->add_option("--synth-views-mean", opt.synth_views_mean,
                       "Poisson mean of views per customer");
  generate->add_option("--synth-fixed-views", opt.synth_fixed_views,
                       "fixed views per customer (overrides the Poisson)");
  generate->add_option("--synth-truncation", opt.synth_truncation,
                       "stick-breaking truncation level");
  generate->add_flag("--synth-crp", opt.synth_crp,
                     "use the exact restaurant construction instead of "
                     "truncated stick breaking");
  generate->add_option("--out", opt.out_dir, "output directory");

  CLI::App* evaluate =
      app.add_subcommand("evaluate", "score held-out data under a checkpoint");
  add_model_options(evaluate, opt);
  add_sampler_options(evaluate, opt);
  evaluate->add_option("--data", opt.data_path, "training data (JSONL)");
  evaluate->add_option("--checkpoint", opt.checkpoint_path, "trained checkpoint");
  evaluate->add_option("--heldout", opt.heldout_path, "held-out data (JSONL)");
  evaluate->add_option("--truth", opt.truth_path,
                       "ground-truth sidecar for recovery ARI");
  evaluate->add_option("--top-k", opt.top_k, "items per topic in the report");
  evaluate->add_option("--out", opt.out_dir, "output directory");

  CLI::App* report =
      app.add_subcommand("report", "summarize a checkpoint's factors");
  add_model_options(report, opt);
  add_sampler_options(report, opt);
  report->add_option("--data", opt.data_path, "training data (JSONL)");
  report->add_option("--checkpoint", opt.checkpoint_path, "trained checkpoint");
  report->add_option("--catalog", opt.catalog_path,
                     "optional id<TAB>title catalog file");
  report->add_option("--top-k", opt.top_k, "entries per summary list");
  report->add_option("--out", opt.out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*train) return cmd_train(opt);
    if (*resume) return cmd_resume(opt);
    if (*generate) return cmd_generate(opt);
    if (*evaluate) return cmd_evaluate(opt);
    if (*report) return cmd_report(opt);
  } catch (const gt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const gt::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const gt::InvalidItemError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const gt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
