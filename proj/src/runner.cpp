// Copyright (C) 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#include "tse/runner.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "tse/error.hpp"
#include "tse/generation.hpp"
#include "tse/parallel.hpp"
#include "tse/prompts.hpp"
#include "tse/text.hpp"

namespace tse {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::set<std::string> kConfigKeys = {
    "task",       "instance_path", "backend",  "scorer",      "chains",      "depth",
    "key_select", "connect",       "collab",   "pair_budget", "sample_k",    "seed",
    "output_dir", "temperature",   "max_tokens", "workers",   "instance_workers", "prompt_dir",
    "label"};

template <typename T>
T field(const json& doc, const char* name, T fallback) {
  auto it = doc.find(name);
  if (it == doc.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    fail(Errc::InvalidConfig, fmt::format("field '{}': {}", name, e.what()));
  }
}

std::string basename_of(const std::string& path) {
  if (path.empty()) return path;
  return fs::path(path).filename().string();
}

// splitmix64 finalizer; spreads (seed, instance, stage) into independent streams.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stage_seed(std::uint64_t seed, std::size_t index, std::uint64_t stage) {
  return mix(mix(mix(seed) ^ static_cast<std::uint64_t>(index)) ^ stage);
}

constexpr std::uint64_t kSeedKeySelect = 1;
constexpr std::uint64_t kSeedExpansion = 2;
constexpr std::uint64_t kSeedCollab = 3;

std::string describe_error(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    std::string out = fmt::format("{}: {}", to_string(err->code()), err->what());
    if (err->step) out += fmt::format(" (step {})", *err->step);
    return out;
  }
  return e.what();
}

// Logs every scorer exchange for the record.
class LoggingScorer final : public Scorer {
 public:
  explicit LoggingScorer(Scorer& inner) : inner_(inner) {}

  ScoreResponse score(const ScoreRequest& request) override {
    json entry = {{"request", to_json(request)}};
    try {
      ScoreResponse r = inner_.score(request);
      entry["response"] = to_json(r);
      push(std::move(entry));
      return r;
    } catch (const std::exception& e) {
      entry["error"] = describe_error(e);
      push(std::move(entry));
      throw;
    }
  }

  json calls() const {
    std::lock_guard lock(mu_);
    return calls_;
  }

 private:
  void push(json entry) {
    std::lock_guard lock(mu_);
    calls_.push_back(std::move(entry));
  }

  Scorer& inner_;
  mutable std::mutex mu_;
  json calls_ = json::array();
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::Io, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    Error err(Errc::MalformedDocument, fmt::format("{}: {}", path, e.what()));
    err.position = e.byte;
    throw err;
  }
}

void write_text_file(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) fail(Errc::Io, "cannot write " + tmp.string());
    out << content;
    if (!out) fail(Errc::Io, "short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

fs::path record_path(const std::string& dir, std::size_t index) {
  return fs::path(dir) / "records" / fmt::format("{:04}.json", index);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (chains < 1) fail(Errc::InvalidConfig, fmt::format("chains must be at least 1, got {}", chains));
  if (depth < 1) fail(Errc::InvalidConfig, fmt::format("depth must be at least 1, got {}", depth));
  if (pair_budget && *pair_budget < 0) fail(Errc::InvalidConfig, "pair_budget must not be negative");
  if (sample_k && *sample_k < 1) fail(Errc::InvalidConfig, "sample_k must be at least 1");
  if (workers < 1 || instance_workers < 1) fail(Errc::InvalidConfig, "worker counts must be at least 1");
  if (!(temperature >= 0.0 && temperature <= 2.0)) fail(Errc::InvalidConfig, "temperature must be in [0, 2]");
  if (max_tokens < 1) fail(Errc::InvalidConfig, "max_tokens must be at least 1");
  const bool needs_scorer =
      collab == CollabMethod::Cws || key_select == KeySelectMethod::Gradient || connect == ConnectMode::Gradient;
  if (needs_scorer && !scorer) {
    fail(Errc::InvalidConfig,
         "collab=cws, key_select=gradient and connect=gradient need a scorer endpoint; "
         "use selfprompt/semantic/judge with a black-box backend");
  }
  if (collab == CollabMethod::NewOnly && effective_pair_budget() == 0) {
    fail(Errc::InvalidConfig, "collab=new_only needs pair_budget > 0");
  }
  backend.validate();
}

std::string ExperimentConfig::ablation_label() const {
  if (!label.empty()) return label;
  if (effective_pair_budget() == 0) {
    return collab == CollabMethod::Majority ? "original" : fmt::format("original+{}", to_string(collab));
  }
  return fmt::format("key={},connect={},collab={}", to_string(key_select), to_string(connect), to_string(collab));
}

json to_json(const ExperimentConfig& c) {
  json j = {{"task", to_string(c.task)},
            {"instance_path", c.instance_path},
            {"backend", to_json(c.backend)},
            {"chains", c.chains},
            {"depth", c.depth},
            {"key_select", to_string(c.key_select)},
            {"connect", to_string(c.connect)},
            {"collab", to_string(c.collab)},
            {"pair_budget", c.effective_pair_budget()},
            {"seed", c.seed},
            {"output_dir", c.output_dir},
            {"temperature", c.temperature},
            {"max_tokens", c.max_tokens},
            {"workers", c.workers},
            {"instance_workers", c.instance_workers},
            {"prompt_dir", c.prompt_dir},
            {"label", c.label}};
  j["scorer"] = c.scorer ? to_json(*c.scorer) : json(nullptr);
  j["sample_k"] = c.sample_k ? json(*c.sample_k) : json(nullptr);
  return j;
}

ExperimentConfig config_from_json(const json& doc) {
  if (!doc.is_object()) fail(Errc::InvalidConfig, "config must be a JSON object");
  for (const auto& [k, v] : doc.items()) {
    if (!kConfigKeys.count(k)) fail(Errc::InvalidConfig, "unknown config field '" + k + "'");
  }
  ExperimentConfig c;
  c.task = task_from_string(field<std::string>(doc, "task", "game24"));
  c.instance_path = field<std::string>(doc, "instance_path", "");
  if (auto it = doc.find("backend"); it != doc.end() && !it->is_null()) c.backend = backend_config_from_json(*it);
  if (auto it = doc.find("scorer"); it != doc.end() && !it->is_null()) c.scorer = scorer_config_from_json(*it);
  c.chains = field<int>(doc, "chains", c.chains);
  c.depth = field<int>(doc, "depth", c.depth);
  c.key_select = key_select_from_string(field<std::string>(doc, "key_select", std::string(to_string(c.key_select))));
  c.connect = connect_mode_from_string(field<std::string>(doc, "connect", std::string(to_string(c.connect))));
  c.collab = collab_from_string(field<std::string>(doc, "collab", std::string(to_string(c.collab))));
  if (doc.contains("pair_budget") && !doc["pair_budget"].is_null()) c.pair_budget = field<int>(doc, "pair_budget", 0);
  if (doc.contains("sample_k") && !doc["sample_k"].is_null()) c.sample_k = field<int>(doc, "sample_k", 0);
  c.seed = field<std::uint64_t>(doc, "seed", c.seed);
  c.output_dir = field<std::string>(doc, "output_dir", c.output_dir);
  c.temperature = field<double>(doc, "temperature", c.temperature);
  c.max_tokens = field<int>(doc, "max_tokens", c.max_tokens);
  c.workers = field<int>(doc, "workers", c.workers);
  c.instance_workers = field<int>(doc, "instance_workers", c.instance_workers);
  c.prompt_dir = field<std::string>(doc, "prompt_dir", c.prompt_dir);
  c.label = field<std::string>(doc, "label", c.label);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  ExperimentConfig c = config_from_json(read_json_file(path));
  // Relative paths inside a config file are relative to that file.
  const fs::path base = fs::path(path).parent_path();
  auto resolve = [&](std::string& p) {
    if (!p.empty() && fs::path(p).is_relative()) p = (base / p).lexically_normal().string();
  };
  resolve(c.instance_path);
  resolve(c.backend.fixture_path);
  resolve(c.prompt_dir);
  return c;
}

json config_snapshot(const ExperimentConfig& config) {
  json j = to_json(config);
  j.erase("output_dir");
  j.erase("workers");
  j.erase("instance_workers");
  j["instance_path"] = basename_of(config.instance_path);
  j["prompt_dir"] = basename_of(config.prompt_dir);
  j["backend"]["fixture_path"] = basename_of(config.backend.fixture_path);
  j["label"] = config.ablation_label();
  return j;
}

std::string config_hash(const ExperimentConfig& config) {
  return text::sha256_hex(config_snapshot(config).dump()).substr(0, 16);
}

json to_json(const RunRecord& r) {
  return {{"index", r.index},
          {"instance", r.instance},
          {"status", r.status},
          {"failed_stage", r.failed_stage},
          {"error", r.error},
          {"config", r.config},
          {"config_hash", r.config_hash},
          {"prompt_version", r.prompt_version},
          {"structure_before", r.structure_before},
          {"structure_after", r.structure_after},
          {"key_nodes", r.key_nodes},
          {"importances", r.importances},
          {"expansion", r.expansion},
          {"verdict", r.verdict},
          {"task_result", r.task_result},
          {"transcript", r.transcript},
          {"scorer_calls", r.scorer_calls},
          {"warnings", r.warnings},
          {"usage", {{"prompt_tokens", r.usage.prompt_tokens}, {"completion_tokens", r.usage.completion_tokens}}},
          {"call_count", r.call_count},
          {"wall_clock_ms", r.wall_clock_ms}};
}

RunRecord record_from_json(const json& doc) {
  try {
    RunRecord r;
    r.index = doc.at("index").get<std::size_t>();
    r.instance = doc.at("instance");
    r.status = doc.at("status").get<std::string>();
    r.failed_stage = doc.at("failed_stage").get<std::string>();
    r.error = doc.at("error").get<std::string>();
    r.config = doc.at("config");
    r.config_hash = doc.at("config_hash").get<std::string>();
    r.prompt_version = doc.at("prompt_version").get<std::string>();
    r.structure_before = doc.at("structure_before");
    r.structure_after = doc.at("structure_after");
    r.key_nodes = doc.at("key_nodes");
    r.importances = doc.at("importances");
    r.expansion = doc.at("expansion");
    r.verdict = doc.at("verdict");
    r.task_result = doc.at("task_result");
    r.transcript = doc.at("transcript");
    r.scorer_calls = doc.at("scorer_calls");
    r.warnings = doc.at("warnings").get<std::vector<std::string>>();
    r.usage.prompt_tokens = doc.at("usage").at("prompt_tokens").get<int>();
    r.usage.completion_tokens = doc.at("usage").at("completion_tokens").get<int>();
    r.call_count = doc.at("call_count").get<std::size_t>();
    r.wall_clock_ms = doc.at("wall_clock_ms").get<double>();
    return r;
  } catch (const json::exception& e) {
    fail(Errc::MalformedDocument, fmt::format("run record: {}", e.what()));
  }
}

RunRecord run_instance(const ExperimentConfig& config, const TaskInstance& instance, std::size_t index,
                       Backend& backend, Scorer* scorer) {
  const auto started = std::chrono::steady_clock::now();
  RunRecord rec;
  rec.index = index;
  rec.instance = to_json(instance);
  rec.config = config_snapshot(config);
  rec.config_hash = config_hash(config);

  TranscriptBackend transcript(backend);
  std::optional<LoggingScorer> logged;
  if (scorer) logged.emplace(*scorer);
  Scorer* sc = logged ? &*logged : nullptr;

  std::string stage = "setup";
  try {
    const PromptLibrary library =
        config.prompt_dir.empty() ? PromptLibrary::builtin() : PromptLibrary::from_directory(config.prompt_dir);
    rec.prompt_version = library.version();
    const LlmContext ctx{transcript, library, config.temperature, config.max_tokens};
    const std::string task = task_text(instance);
    const AnswerKey key = answer_key(instance.kind());
    const std::size_t budget = static_cast<std::size_t>(config.effective_pair_budget());
    auto need_scorer = [&]() -> Scorer& {
      if (!sc) fail(Errc::ScorerUnavailable, "this configuration needs a scorer endpoint");
      return *sc;
    };

    stage = "chains";
    ThoughtStructure structure(task);
    {
      const auto n = static_cast<std::size_t>(config.chains);
      std::vector<std::vector<std::string>> texts(n);
      parallel_for_all(n, config.workers, [&](std::size_t i) {
        texts[i] = generate_chain(ctx, task, config.depth, static_cast<int>(i + 1), config.chains,
                                  fmt::format("1-chain/p{}", pad(i + 1)));
      });
      for (const auto& t : texts) structure.add_chain(t);
    }
    rec.structure_before = structure_to_json(structure);

    std::optional<ImportanceTable> table;
    KeyNodeSet keys;
    if (budget > 0) {
      stage = "key_select";
      switch (config.key_select) {
        case KeySelectMethod::Gradient:
          table = score_chains(structure, need_scorer());
          keys = select_key_nodes_gradient(structure, *table);
          break;
        case KeySelectMethod::SelfPrompt:
          keys = select_key_nodes_selfprompt(structure, ctx, task, config.workers);
          break;
        case KeySelectMethod::Random:
          keys = select_key_nodes_random(structure, stage_seed(config.seed, index, kSeedKeySelect));
          break;
      }
      rec.key_nodes = to_json(keys);
      rec.warnings.insert(rec.warnings.end(), keys.warnings.begin(), keys.warnings.end());

      stage = "expansion";
      if (config.connect == ConnectMode::Gradient && !table) table = score_chains(structure, need_scorer());
      if (table) rec.importances = to_json(*table);
      ExpansionOptions opts;
      opts.mode = config.connect;
      opts.budget.max_pairs = budget;
      opts.seed = stage_seed(config.seed, index, kSeedExpansion);
      opts.workers = config.workers;
      const ExpansionResult expansion =
          expand_structure(structure, keys, ctx, task, opts, table ? &*table : nullptr);
      rec.expansion = to_json(expansion);
      rec.warnings.insert(rec.warnings.end(), expansion.warnings.begin(), expansion.warnings.end());
      for (const auto& s : expansion.skipped) rec.warnings.push_back("skipped pair: " + s.error);
    }
    rec.structure_after = structure_to_json(structure);

    stage = "collaborate";
    Verdict verdict;
    std::vector<ChainId> every;
    for (const auto& c : structure.chains()) every.push_back(c.chain_id);
    switch (config.collab) {
      case CollabMethod::Cws:
        verdict = collaborative_weighted_summation(structure, ctx, task, need_scorer(), key, config.workers);
        break;
      case CollabMethod::Judge:
        verdict = judge_and_vote(structure, every, ctx, task, key, config.workers);
        break;
      case CollabMethod::Majority:
        verdict = majority_vote(collect_candidates(structure, every, key));
        break;
      case CollabMethod::RandomSample: {
        const std::size_t k = config.sample_k ? static_cast<std::size_t>(*config.sample_k) : (every.size() + 1) / 2;
        const auto subset = sample_subset(every, k, stage_seed(config.seed, index, kSeedCollab));
        verdict = majority_vote(collect_candidates(structure, subset, key), CollabMethod::RandomSample);
        verdict.audit = {{"sampled_chain_ids", subset}};
        break;
      }
      case CollabMethod::NewOnly: {
        const auto fresh = new_chains_only(structure);
        if (fresh.empty()) fail(Errc::NoCandidates, "no new branches to vote over");
        verdict = majority_vote(collect_candidates(structure, fresh, key), CollabMethod::NewOnly);
        verdict.audit = {{"chain_ids", fresh}};
        break;
      }
    }
    rec.verdict = to_json(verdict);
    rec.warnings.insert(rec.warnings.end(), verdict.warnings.begin(), verdict.warnings.end());

    stage = "verify";
    rec.task_result = evaluate_answer(instance, verdict.decision.text, ctx);
    if (rec.task_result.contains("warnings")) {
      for (const auto& w : rec.task_result["warnings"]) rec.warnings.push_back(w.get<std::string>());
    }
  } catch (const std::exception& e) {
    rec.status = "failed";
    rec.failed_stage = stage;
    rec.error = describe_error(e);
    spdlog::warn("instance {}: {} failed: {}", index, stage, rec.error);
  }

  for (const auto& entry : transcript.entries()) rec.transcript.push_back(to_json(entry));
  if (logged) rec.scorer_calls = logged->calls();
  rec.usage = transcript.usage();
  rec.call_count = transcript.call_count();
  // Replayed runs carry no timing so their records compare byte for byte.
  if (config.backend.kind != BackendKind::Scripted) {
    rec.wall_clock_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  }
  return rec;
}

std::vector<std::string> report_notes(const json& snapshot) {
  std::vector<std::string> notes;
  if (snapshot.value("connect", std::string()) == "layer_based") {
    notes.emplace_back(
        "layer_based connects at the key node with the smaller step index, reading 'lower layer' as closer to "
        "the question; ties go to the first chain of the pair");
  }
  return notes;
}

namespace {

double pct(double part, std::size_t whole) { return whole == 0 ? 0.0 : 100.0 * part / static_cast<double>(whole); }

}  // namespace

Report render_report(const ReportRow& row) {
  Report rep;
  rep.row = row;
  json metrics;
  std::string header = "| Method | Instances | Failed |";
  std::string rule = "|---|---:|---:|";
  std::string line = fmt::format("| {} | {} | {} |", row.label, row.instances, row.failed);
  auto col = [&](const std::string& name, double v) {
    header += fmt::format(" {} |", name);
    rule += "---:|";
    line += fmt::format(" {} |", text::format_fixed(v, 2));
  };
  switch (row.task) {
    case TaskKind::Game24:
      metrics = {{"success_rate", row.success_rate}};
      col("Success Rate (%)", row.success_rate);
      break;
    case TaskKind::Crossword:
      metrics = {{"letter_accuracy", row.letter_accuracy},
                 {"word_accuracy", row.word_accuracy},
                 {"game_accuracy", row.game_accuracy}};
      col("Letter (%)", row.letter_accuracy);
      col("Word (%)", row.word_accuracy);
      col("Game (%)", row.game_accuracy);
      break;
    case TaskKind::Writing:
      metrics = {{"soundness", row.soundness},   {"innovation", row.innovation},
                 {"coherence", row.coherence},   {"expression", row.expression},
                 {"overall", row.overall},       {"constraint_pass_rate", row.constraint_pass_rate}};
      col("Soundness", row.soundness);
      col("Innovation", row.innovation);
      col("Coherence", row.coherence);
      col("Expression", row.expression);
      col("Overall", row.overall);
      col("Constraints (%)", row.constraint_pass_rate);
      break;
  }
  header += " Calls | Prompt Tokens | Completion Tokens |";
  rule += "---:|---:|---:|";
  line += fmt::format(" {} | {} | {} |", row.calls, row.prompt_tokens, row.completion_tokens);

  rep.document = {{"label", row.label},
                  {"task", to_string(row.task)},
                  {"instances", row.instances},
                  {"failed", row.failed},
                  {"metrics", std::move(metrics)},
                  {"cost", {{"calls", row.calls},
                            {"prompt_tokens", row.prompt_tokens},
                            {"completion_tokens", row.completion_tokens}}}};
  if (!row.notes.empty()) rep.document["notes"] = row.notes;
  rep.table = header + "\n" + rule + "\n" + line + "\n";
  for (const auto& n : row.notes) rep.table += "\nNote: " + n + "\n";
  return rep;
}

Report emit_report(const std::vector<RunRecord>& records) {
  ReportRow row;
  if (records.empty()) return render_report(row);
  row.task = task_from_string(records.front().instance.at("task").get<std::string>());
  row.label = records.front().config.value("label", std::string());
  row.notes = report_notes(records.front().config);
  for (const auto& r : records) {
    if (task_from_string(r.instance.at("task").get<std::string>()) != row.task) {
      fail(Errc::MixedTasks, fmt::format("record {} is {} but the batch is {}", r.index,
                                         r.instance.at("task").get<std::string>(), to_string(row.task)));
    }
  }

  row.instances = records.size();
  double solved = 0, letters = 0, words = 0, games = 0;
  double dims[4] = {0, 0, 0, 0};
  double overall = 0, passing = 0;
  std::size_t scored = 0;
  for (const auto& r : records) {
    if (!r.ok()) ++row.failed;
    row.calls += r.call_count;
    row.prompt_tokens += r.usage.prompt_tokens;
    row.completion_tokens += r.usage.completion_tokens;
    if (!r.ok()) continue;
    const json& t = r.task_result;
    switch (row.task) {
      case TaskKind::Game24:
        if (t.at("accepted").get<bool>()) solved += 1;
        break;
      case TaskKind::Crossword:
        letters += t.at("letter_accuracy").get<double>();
        words += t.at("word_accuracy").get<double>();
        if (t.at("game_solved").get<bool>()) games += 1;
        break;
      case TaskKind::Writing: {
        const json& s = t.at("scorecard");
        writing::Scorecard card{s.at("soundness").get<double>(), s.at("innovation").get<double>(),
                                s.at("coherence").get<double>(), s.at("expression").get<double>()};
        dims[0] += card.soundness;
        dims[1] += card.innovation;
        dims[2] += card.coherence;
        dims[3] += card.expression;
        overall += card.overall();
        if (t.at("constraints").at("all_pass").get<bool>()) passing += 1;
        ++scored;
        break;
      }
    }
  }
  // Failed game24/crossword instances count as misses; writing means cover
  // the passages that were actually scored.
  row.success_rate = pct(solved, row.instances);
  row.letter_accuracy = pct(letters, row.instances);
  row.word_accuracy = pct(words, row.instances);
  row.game_accuracy = pct(games, row.instances);
  if (scored > 0) {
    const double n = static_cast<double>(scored);
    row.soundness = dims[0] / n;
    row.innovation = dims[1] / n;
    row.coherence = dims[2] / n;
    row.expression = dims[3] / n;
    row.overall = overall / n;
  }
  row.constraint_pass_rate = pct(passing, row.instances);
  return render_report(row);
}

bool ExperimentResult::any_failed() const {
  for (const auto& r : records) {
    if (!r.ok()) return true;
  }
  return false;
}

std::vector<RunRecord> load_records(const std::string& dir) {
  std::vector<RunRecord> out;
  const fs::path root = fs::path(dir) / "records";
  if (!fs::is_directory(root)) fail(Errc::Io, "no records directory under " + dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) out.push_back(record_from_json(read_json_file(f.string())));
  std::sort(out.begin(), out.end(), [](const RunRecord& a, const RunRecord& b) { return a.index < b.index; });
  return out;
}

void write_report(const std::string& dir, const Report& report) {
  fs::create_directories(dir);
  write_text_file(fs::path(dir) / "report.json", report.document.dump(2) + "\n");
  write_text_file(fs::path(dir) / "report.md", report.table);
}

ExperimentResult run_experiment(const ExperimentConfig& config, const std::vector<TaskInstance>& instances,
                                Backend& backend, Scorer* scorer) {
  config.validate();
  for (const auto& inst : instances) {
    if (inst.kind() != config.task) {
      fail(Errc::MixedTasks, fmt::format("instance is {} but the config says {}", to_string(inst.kind()),
                                         to_string(config.task)));
    }
  }
  fs::create_directories(fs::path(config.output_dir) / "records");
  const std::string hash = config_hash(config);

  ExperimentResult result;
  result.records.resize(instances.size());
  std::vector<char> reused(instances.size(), 0);
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const fs::path p = record_path(config.output_dir, i);
    if (!fs::exists(p)) continue;
    try {
      RunRecord r = record_from_json(read_json_file(p.string()));
      if (r.config_hash == hash && r.index == i && r.instance == to_json(instances[i])) {
        result.records[i] = std::move(r);
        reused[i] = 1;
        ++result.resumed;
      }
    } catch (const Error& e) {
      spdlog::warn("ignoring unreadable record {}: {}", p.string(), e.what());
    }
  }

  parallel_for_all(instances.size(), config.instance_workers, [&](std::size_t i) {
    if (reused[i]) return;
    RunRecord r = run_instance(config, instances[i], i, backend, scorer);
    write_text_file(record_path(config.output_dir, i), to_json(r).dump(2) + "\n");
    result.records[i] = std::move(r);
  });

  if (instances.empty()) {
    ReportRow row;
    row.task = config.task;
    row.label = config.ablation_label();
    row.notes = report_notes(config_snapshot(config));
    result.report = render_report(row);
  } else {
    result.report = emit_report(result.records);
  }
  write_report(config.output_dir, result.report);
  return result;
}

}  // namespace tse
