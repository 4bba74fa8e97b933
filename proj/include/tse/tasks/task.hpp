// Copyright (C) 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "tse/collaborate.hpp"
#include "tse/generation.hpp"
#include "tse/tasks/crossword.hpp"
#include "tse/tasks/game24.hpp"
#include "tse/tasks/writing.hpp"

namespace tse {

enum class TaskKind { Game24, Crossword, Writing };

std::string_view to_string(TaskKind kind);
TaskKind task_from_string(std::string_view name);

struct TaskInstance {
  std::variant<game24::Instance, crossword::Instance, writing::Instance> data;

  TaskKind kind() const { return static_cast<TaskKind>(data.index()); }
};

/// The prompt text every LLM-facing template receives as {{task}}.
std::string task_text(const TaskInstance& instance);

nlohmann::json to_json(const TaskInstance& instance);

/// Game24 answers merge on the canonical expression, crossword answers on
/// the normalized grid; writing passages never merge.
AnswerKey answer_key(TaskKind kind);

std::vector<TaskInstance> parse_instances(TaskKind kind, std::string_view text);
std::vector<TaskInstance> load_instances(TaskKind kind, const std::string& path);

/// Scores the decided answer against the task's verifier. Writing calls the
/// judge through `ctx`; the other tasks are pure.
nlohmann::json evaluate_answer(const TaskInstance& instance, const std::string& answer, const LlmContext& ctx);

}  // namespace tse
