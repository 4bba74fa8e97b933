// Copyright (C) 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: run an experiment, rebuild a report from records,
// or check a config file.
//
// Exit codes: 0 success, 1 invalid input, 2 batch finished with failures
// (or had no instances).

#include <iostream>
#include <memory>
#include <optional>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "tse/error.hpp"
#include "tse/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitFailures = 2;

struct RunOptions {
  std::string task;
  std::string instances;
  std::string config;
  std::string key_select;
  std::string connect;
  std::string collab;
  std::optional<int> chains;
  std::optional<int> depth;
  std::optional<int> pairs;
  std::optional<std::uint64_t> seed;
  std::string backend;
  std::string fixtures;
  std::string out;
  std::optional<int> workers;
  std::optional<int> instance_workers;
  std::string record_fixtures;
};

tse::ExperimentConfig build_config(const RunOptions& o) {
  tse::ExperimentConfig c = tse::load_config(o.config);
  if (!o.task.empty()) c.task = tse::task_from_string(o.task);
  if (!o.instances.empty()) c.instance_path = o.instances;
  if (!o.key_select.empty()) c.key_select = tse::key_select_from_string(o.key_select);
  if (!o.connect.empty()) c.connect = tse::connect_mode_from_string(o.connect);
  if (!o.collab.empty()) c.collab = tse::collab_from_string(o.collab);
  if (o.chains) c.chains = *o.chains;
  if (o.depth) c.depth = *o.depth;
  if (o.pairs) c.pair_budget = *o.pairs;
  if (o.seed) c.seed = *o.seed;
  if (!o.backend.empty()) {
    if (o.backend == "http") {
      c.backend.kind = tse::BackendKind::Http;
    } else if (o.backend == "scripted") {
      c.backend.kind = tse::BackendKind::Scripted;
    } else {
      tse::fail(tse::Errc::InvalidConfig, "unknown backend '" + o.backend + "'");
    }
  }
  if (!o.fixtures.empty()) c.backend.fixture_path = o.fixtures;
  if (!o.out.empty()) c.output_dir = o.out;
  if (o.workers) c.workers = *o.workers;
  if (o.instance_workers) c.instance_workers = *o.instance_workers;
  c.validate();
  return c;
}

int cmd_run(const RunOptions& o) {
  tse::ExperimentConfig config;
  std::vector<tse::TaskInstance> instances;
  try {
    config = build_config(o);
    if (config.instance_path.empty()) tse::fail(tse::Errc::InvalidConfig, "no instance file given");
    instances = tse::load_instances(config.task, config.instance_path);
  } catch (const tse::Error& e) {
    spdlog::error("{}: {}", tse::to_string(e.code()), e.what());
    return kExitInvalid;
  }

  try {
    std::unique_ptr<tse::Backend> backend = tse::make_backend(config.backend);
    std::unique_ptr<tse::RecordingBackend> recorder;
    tse::Backend* active = backend.get();
    if (!o.record_fixtures.empty()) {
      recorder = std::make_unique<tse::RecordingBackend>(*backend);
      active = recorder.get();
    }
    std::unique_ptr<tse::HttpScorer> scorer;
    if (config.scorer) scorer = std::make_unique<tse::HttpScorer>(*config.scorer);

    spdlog::info("running {} {} instance(s) as '{}' into {}", instances.size(), tse::to_string(config.task),
                 config.ablation_label(), config.output_dir);
    const tse::ExperimentResult result = tse::run_experiment(config, instances, *active, scorer.get());
    if (recorder) recorder->write(o.record_fixtures);

    std::cout << result.report.table;
    if (result.resumed > 0) spdlog::info("reused {} existing record(s)", result.resumed);
    if (instances.empty()) {
      spdlog::warn("instance file has no instances");
      return kExitFailures;
    }
    return result.any_failed() ? kExitFailures : kExitOk;
  } catch (const tse::Error& e) {
    spdlog::error("{}: {}", tse::to_string(e.code()), e.what());
    return kExitInvalid;
  }
}

int cmd_report(const std::string& dir) {
  try {
    const auto records = tse::load_records(dir);
    const tse::Report report = tse::emit_report(records);
    tse::write_report(dir, report);
    std::cout << report.table;
    return kExitOk;
  } catch (const tse::Error& e) {
    spdlog::error("{}: {}", tse::to_string(e.code()), e.what());
    return kExitInvalid;
  }
}

int cmd_validate(const std::string& path) {
  try {
    const tse::ExperimentConfig c = tse::load_config(path);
    c.validate();
    std::cout << "ok " << tse::config_hash(c) << ' ' << c.ablation_label() << '\n';
    return kExitOk;
  } catch (const tse::Error& e) {
    std::cerr << tse::to_string(e.code()) << ": " << e.what() << '\n';
    return kExitInvalid;
  }
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("tse"));

  CLI::App app{"Thought-structure exploration runner"};
  app.require_subcommand(1);
  bool verbose = false;
  bool quiet = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");
  app.add_flag("-q,--quiet", quiet, "Errors only");

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment over an instance file");
  run_cmd->add_option("--config", run.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--task", run.task, "game24 | crossword | writing");
  run_cmd->add_option("--instances", run.instances, "Instance file");
  run_cmd->add_option("--key-select", run.key_select, "gradient | selfprompt | random");
  run_cmd->add_option("--connect", run.connect, "gradient | semantic | random | layer_based");
  run_cmd->add_option("--collab", run.collab, "cws | judge | majority | random_sample | new_only");
  run_cmd->add_option("--chains", run.chains, "Parallel chains");
  run_cmd->add_option("--depth", run.depth, "Steps per chain");
  run_cmd->add_option("--pairs", run.pairs, "Pair budget (0 disables expansion)");
  run_cmd->add_option("--seed", run.seed, "Seed for the random ablations");
  run_cmd->add_option("--backend", run.backend, "http | scripted");
  run_cmd->add_option("--fixtures", run.fixtures, "Fixture file for the scripted backend");
  run_cmd->add_option("--out", run.out, "Output directory");
  run_cmd->add_option("--workers", run.workers, "Concurrent calls within an instance");
  run_cmd->add_option("--instance-workers", run.instance_workers, "Instances in flight");
  run_cmd->add_option("--record-fixtures", run.record_fixtures, "Write every reply to this fixture file");

  std::string report_dir;
  auto* report_cmd = app.add_subcommand("report", "Rebuild the report from a run directory");
  report_cmd->add_option("dir", report_dir, "Run directory")->required();

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check a config file");
  validate_cmd->add_option("config", validate_path, "Config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }
  spdlog::set_level(quiet ? spdlog::level::err : verbose ? spdlog::level::debug : spdlog::level::info);

  if (*run_cmd) return cmd_run(run);
  if (*report_cmd) return cmd_report(report_dir);
  if (*validate_cmd) return cmd_validate(validate_path);
  return kExitInvalid;
}
