// Copyright (C) 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#include "tse/tasks/task.hpp"

#include <fstream>
#include <sstream>

#include "tse/error.hpp"
#include "tse/text.hpp"

namespace tse {

using nlohmann::json;

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::Game24: return "game24";
    case TaskKind::Crossword: return "crossword";
    case TaskKind::Writing: return "writing";
  }
  return "game24";
}

TaskKind task_from_string(std::string_view name) {
  if (name == "game24") return TaskKind::Game24;
  if (name == "crossword") return TaskKind::Crossword;
  if (name == "writing") return TaskKind::Writing;
  fail(Errc::InvalidConfig, "unknown task '" + std::string(name) + "'");
}

std::string task_text(const TaskInstance& instance) {
  switch (instance.kind()) {
    case TaskKind::Game24: {
      const auto& g = std::get<game24::Instance>(instance.data);
      return "Use the numbers " + game24::describe(g) +
             " and the basic arithmetic operations (+ - * /) to obtain 24. Use each number exactly once. "
             "Give the final answer as an expression.";
    }
    case TaskKind::Crossword: return crossword::describe(std::get<crossword::Instance>(instance.data));
    case TaskKind::Writing: return writing::describe(std::get<writing::Instance>(instance.data));
  }
  return {};
}

json to_json(const TaskInstance& instance) {
  switch (instance.kind()) {
    case TaskKind::Game24: {
      const auto& g = std::get<game24::Instance>(instance.data);
      return {{"task", "game24"}, {"numbers", g.numbers}};
    }
    case TaskKind::Crossword: {
      const auto& c = std::get<crossword::Instance>(instance.data);
      return {{"task", "crossword"},
              {"horizontal_clues", c.horizontal_clues},
              {"vertical_clues", c.vertical_clues},
              {"solution", c.solution}};
    }
    case TaskKind::Writing: {
      const auto& w = std::get<writing::Instance>(instance.data);
      return {{"task", "writing"}, {"end_sentences", w.end_sentences}};
    }
  }
  return {};
}

AnswerKey answer_key(TaskKind kind) {
  switch (kind) {
    case TaskKind::Game24:
      return {[](const std::string& conclusion) {
                if (auto e = game24::extract_expression(conclusion)) return game24::canonical_form(*e);
                return text::collapse_whitespace(conclusion);
              },
              true};
    case TaskKind::Crossword:
      return {[](const std::string& conclusion) {
                if (auto g = crossword::extract_grid(conclusion)) return *g;
                return text::collapse_whitespace(conclusion);
              },
              true};
    case TaskKind::Writing:
      return {[](const std::string& conclusion) { return text::trim_copy(conclusion); }, false};
  }
  return {};
}

std::vector<TaskInstance> parse_instances(TaskKind kind, std::string_view text) {
  std::vector<TaskInstance> out;
  switch (kind) {
    case TaskKind::Game24:
      for (auto& i : game24::parse_instances(text)) out.push_back({i});
      break;
    case TaskKind::Crossword:
      for (auto& i : crossword::parse_instances(text)) out.push_back({i});
      break;
    case TaskKind::Writing:
      for (auto& i : writing::parse_instances(text)) out.push_back({i});
      break;
  }
  return out;
}

std::vector<TaskInstance> load_instances(TaskKind kind, const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::Io, "cannot open instance file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_instances(kind, ss.str());
}

json evaluate_answer(const TaskInstance& instance, const std::string& answer, const LlmContext& ctx) {
  switch (instance.kind()) {
    case TaskKind::Game24: {
      const auto& g = std::get<game24::Instance>(instance.data);
      bool accepted = false;
      std::string note;
      try {
        accepted = game24::verify_24(g, game24::parse_expression(answer));
      } catch (const Error& e) {
        note = e.what();
      }
      json j = {{"answer", answer}, {"accepted", accepted}};
      if (!note.empty()) j["note"] = note;
      return j;
    }
    case TaskKind::Crossword: {
      const auto& c = std::get<crossword::Instance>(instance.data);
      crossword::Metrics m;
      std::string note;
      try {
        m = crossword::crossword_metrics(c, answer);
      } catch (const Error& e) {
        note = e.what();
      }
      json j = {{"answer", answer},
                {"letter_accuracy", m.letter_accuracy},
                {"word_accuracy", m.word_accuracy},
                {"game_solved", m.game_solved},
                {"letters_correct", m.letters_correct},
                {"words_correct", m.words_correct}};
      if (!note.empty()) j["note"] = note;
      return j;
    }
    case TaskKind::Writing: {
      const auto& w = std::get<writing::Instance>(instance.data);
      const auto check = writing::writing_constraint_check(w, answer);
      const auto judged = writing::writing_judge(ctx, task_text(instance), answer);
      return {{"answer", answer},
              {"constraints", {{"paragraphs", check.paragraphs},
                               {"paragraph_count", check.paragraph_count},
                               {"all_pass", check.all_pass()},
                               {"reason", check.reason}}},
              {"scorecard", {{"soundness", judged.card.soundness},
                             {"innovation", judged.card.innovation},
                             {"coherence", judged.card.coherence},
                             {"expression", judged.card.expression}}},
              {"judge_replies", judged.replies},
              {"warnings", judged.warnings}};
    }
  }
  return {};
}

}  // namespace tse
