// Copyright (C) 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "tse/llm_backend.hpp"
#include "tse/prompts.hpp"

namespace tse {

/// Everything an LLM-facing step needs: where to send prompts, which
/// templates to render, and the sampling parameters.
struct LlmContext {
  Backend& backend;
  const PromptLibrary& prompts;
  double temperature = 0.7;
  int max_tokens = 50;
};

/// Renders `template_name` and sends it with the shared system prompt.
GenerationResponse ask(const LlmContext& ctx, const std::string& template_name,
                       const Bindings& bindings, const std::string& tag);

/// "1. first\n2. second"; empty input renders as "(none)".
std::string numbered_list(const std::vector<std::string>& items);

/// Zero-padded for tag ordering.
std::string pad(std::size_t value, int width = 3);

/// Generates one chain of `depth` sentences, one call per step, each
/// conditioned on the task and the chain's own prefix. The last sentence is
/// the conclusion. A blank reply or a missing fixture at step s raises
/// TruncatedChain with `step = s`.
std::vector<std::string> generate_chain(const LlmContext& ctx, const std::string& task_text,
                                        int depth, int path_index, int path_count,
                                        const std::string& tag_prefix);

}  // namespace tse
