// Copyright (C) 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#include "tse/generation.hpp"

#include <fmt/format.h>

#include "tse/error.hpp"
#include "tse/text.hpp"

namespace tse {

GenerationResponse ask(const LlmContext& ctx, const std::string& template_name,
                       const Bindings& bindings, const std::string& tag) {
  GenerationRequest req;
  req.system_prompt = ctx.prompts.render("system", {});
  req.user_prompt = ctx.prompts.render(template_name, bindings);
  req.temperature = ctx.temperature;
  req.max_tokens = ctx.max_tokens;
  req.template_name = template_name;
  req.tag = tag;
  return ctx.backend.generate(req);
}

std::string numbered_list(const std::vector<std::string>& items) {
  if (items.empty()) return "(none)";
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out.push_back('\n');
    out += fmt::format("{}. {}", i + 1, items[i]);
  }
  return out;
}

std::string pad(std::size_t value, int width) { return fmt::format("{:0{}}", value, width); }

std::vector<std::string> generate_chain(const LlmContext& ctx, const std::string& task_text,
                                        int depth, int path_index, int path_count,
                                        const std::string& tag_prefix) {
  if (depth < 1) fail(Errc::InvalidConfig, "chain depth must be at least 1");
  std::vector<std::string> steps;
  for (int step = 1; step <= depth; ++step) {
    Bindings b{{"task", task_text},
               {"path_index", std::to_string(path_index)},
               {"path_count", std::to_string(path_count)},
               {"prior_steps", numbered_list(steps)},
               {"step_number", std::to_string(step)},
               {"depth", std::to_string(depth)}};
    std::string reply;
    try {
      reply = ask(ctx, "chain_step", b, fmt::format("{}/s{}", tag_prefix, pad(step))).text;
    } catch (const Error& e) {
      if (e.code() != Errc::FixtureMiss) throw;
      Error err(Errc::TruncatedChain, fmt::format("step {}: {}", step, e.what()));
      err.step = step;
      throw err;
    }
    if (text::is_blank(reply)) {
      Error err(Errc::TruncatedChain, fmt::format("step {} came back empty", step));
      err.step = step;
      throw err;
    }
    steps.push_back(text::trim_copy(reply));
  }
  return steps;
}

}  // namespace tse
