// Copyright (C) 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tse/collaborate.hpp"
#include "tse/expansion.hpp"
#include "tse/importance.hpp"
#include "tse/llm_backend.hpp"
#include "tse/scorer_client.hpp"
#include "tse/tasks/task.hpp"

namespace tse {

struct ExperimentConfig {
  TaskKind task = TaskKind::Game24;
  std::string instance_path;
  BackendConfig backend;
  std::optional<ScorerEndpointConfig> scorer;
  int chains = 5;
  int depth = 5;
  KeySelectMethod key_select = KeySelectMethod::SelfPrompt;
  ConnectMode connect = ConnectMode::Semantic;
  CollabMethod collab = CollabMethod::Judge;
  std::optional<int> pair_budget;  // defaults to `chains`
  std::optional<int> sample_k;     // random_sample; defaults to half the chains, rounded up
  std::uint64_t seed = 0;
  std::string output_dir = "runs";
  double temperature = 0.7;
  int max_tokens = 50;
  int workers = 1;           // fan-out inside one instance
  int instance_workers = 1;  // instances in flight
  std::string prompt_dir;    // empty: built-in templates
  std::string label;         // empty: derived from the ablation switches

  int effective_pair_budget() const { return pair_budget.value_or(chains); }

  /// InvalidConfig unless the combination can run.
  void validate() const;

  /// Human-readable name of the ablation row this config realizes.
  std::string ablation_label() const;
};

nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);

/// Config as stamped into records: paths reduced to file names, output
/// directory dropped, so records do not depend on where a run happened.
nlohmann::json config_snapshot(const ExperimentConfig& config);

/// Notes a report for runs of this config should carry.
std::vector<std::string> report_notes(const nlohmann::json& snapshot);
std::string config_hash(const ExperimentConfig& config);

/// Everything one instance produced. Serialized as one document per instance.
struct RunRecord {
  std::size_t index = 0;
  nlohmann::json instance;
  std::string status = "ok";  // ok | failed
  std::string failed_stage;
  std::string error;
  nlohmann::json config;
  std::string config_hash;
  std::string prompt_version;
  nlohmann::json structure_before;
  nlohmann::json structure_after;
  nlohmann::json key_nodes;
  nlohmann::json importances;
  nlohmann::json expansion;
  nlohmann::json verdict;
  nlohmann::json task_result;
  nlohmann::json transcript = nlohmann::json::array();
  nlohmann::json scorer_calls = nlohmann::json::array();
  std::vector<std::string> warnings;
  TokenUsage usage;
  std::size_t call_count = 0;
  double wall_clock_ms = 0.0;

  bool ok() const { return status == "ok"; }
};

nlohmann::json to_json(const RunRecord& record);
RunRecord record_from_json(const nlohmann::json& doc);

/// Runs one instance end to end: chains, key nodes, expansion,
/// collaboration, verification. Never throws for pipeline failures; those
/// come back as status=failed with the stage name and the partial trail.
RunRecord run_instance(const ExperimentConfig& config, const TaskInstance& instance, std::size_t index,
                       Backend& backend, Scorer* scorer);

struct ReportRow {
  std::string label;
  TaskKind task = TaskKind::Game24;
  std::size_t instances = 0;
  std::size_t failed = 0;
  // game24
  double success_rate = 0.0;
  // crossword, macro-averaged, in percent
  double letter_accuracy = 0.0;
  double word_accuracy = 0.0;
  double game_accuracy = 0.0;
  // writing
  double soundness = 0.0;
  double innovation = 0.0;
  double coherence = 0.0;
  double expression = 0.0;
  double overall = 0.0;
  double constraint_pass_rate = 0.0;
  // cost
  std::size_t calls = 0;
  long long prompt_tokens = 0;
  long long completion_tokens = 0;
  // Interpretation notes that qualify the numbers, e.g. how an ablation
  // mode was realized.
  std::vector<std::string> notes;
};

struct Report {
  ReportRow row;
  nlohmann::json document;  // machine-readable
  std::string table;        // human-readable
};

/// Table and JSON forms of one row.
Report render_report(const ReportRow& row);

/// Aggregates homogeneous records. MixedTasks if the records disagree on
/// the task.
Report emit_report(const std::vector<RunRecord>& records);

struct ExperimentResult {
  std::vector<RunRecord> records;
  Report report;
  std::size_t resumed = 0;

  bool any_failed() const;
};

/// Runs every instance, writing `<output_dir>/records/NNNN.json` as each
/// finishes and the report files at the end. Records already on disk with a
/// matching config hash are reused instead of re-run.
ExperimentResult run_experiment(const ExperimentConfig& config, const std::vector<TaskInstance>& instances,
                                Backend& backend, Scorer* scorer);

/// Loads every record under `<dir>/records`, in index order.
std::vector<RunRecord> load_records(const std::string& dir);

void write_report(const std::string& dir, const Report& report);

}  // namespace tse
