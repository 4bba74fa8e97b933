// Copyright (C) 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#include "tse/tasks/writing.hpp"

#include <cmath>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "tse/error.hpp"
#include "tse/text.hpp"

namespace tse::writing {

namespace {

bool is_closing_quote(std::string_view s) {
  return s.ends_with("\"") || s.ends_with("'") || s.ends_with("\xE2\x80\x9D") || s.ends_with("\xE2\x80\x99");
}

// Comparable tail: collapsed whitespace, closing quotes stripped, no space
// before final punctuation.
std::string normalize_ending(std::string_view s) {
  std::string out = text::collapse_whitespace(s);
  for (bool changed = true; changed;) {
    changed = false;
    if (out.ends_with("\xE2\x80\x9D") || out.ends_with("\xE2\x80\x99")) {
      out.resize(out.size() - 3);
      changed = true;
    } else if (!out.empty() && is_closing_quote(out)) {
      out.pop_back();
      changed = true;
    }
    while (!out.empty() && out.back() == ' ') {
      out.pop_back();
      changed = true;
    }
  }
  std::string fixed;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const bool punct_next = i + 1 < out.size() && std::string_view(".!?,;:").find(out[i + 1]) != std::string_view::npos;
    if (out[i] == ' ' && punct_next) continue;
    fixed.push_back(out[i]);
  }
  return fixed;
}

std::vector<std::string> split_paragraphs(std::string_view passage) {
  std::vector<std::string> paras;
  std::string current;
  std::istringstream in{std::string(passage)};
  std::string line;
  while (std::getline(in, line)) {
    if (text::is_blank(line)) {
      if (!text::is_blank(current)) paras.push_back(current);
      current.clear();
      continue;
    }
    if (!current.empty()) current.push_back('\n');
    current += line;
  }
  if (!text::is_blank(current)) paras.push_back(current);
  return paras;
}

struct Dimension {
  const char* name;
  const char* description;
};

constexpr std::array<Dimension, 4> kDimensions{{
    {"Soundness", "logical soundness of the ideas"},
    {"Innovation", "originality and freshness"},
    {"Coherence", "content coherence of the reasoning across paragraphs"},
    {"Expression", "clarity of expression"},
}};

}  // namespace

ConstraintCheck writing_constraint_check(const Instance& instance, std::string_view passage) {
  ConstraintCheck check;
  const auto paras = split_paragraphs(passage);
  check.paragraph_count = paras.size();
  if (paras.size() != 4) {
    check.reason = fmt::format("paragraph count {} != 4", paras.size());
    return check;
  }
  std::vector<std::string> failed;
  for (std::size_t i = 0; i < 4; ++i) {
    const std::string para = normalize_ending(paras[i]);
    const std::string want = normalize_ending(instance.end_sentences[i]);
    check.paragraphs[i] = !want.empty() && para.ends_with(want);
    if (!check.paragraphs[i]) failed.push_back(std::to_string(i + 1));
  }
  if (!failed.empty()) {
    std::string list;
    for (const auto& f : failed) list += (list.empty() ? "" : ", ") + f;
    check.reason = "wrong ending in paragraph " + list;
  }
  return check;
}

double snap_score(double raw) {
  if (!std::isfinite(raw)) return 0.0;
  const double snapped = std::floor(raw * 2.0 + 0.5) / 2.0;
  return std::clamp(snapped, 0.0, 10.0);
}

JudgedScorecard writing_judge(const LlmContext& ctx, const std::string& task_text, std::string_view passage,
                              const std::string& tag_prefix) {
  JudgedScorecard out;
  std::array<double, 4> scores{};
  for (std::size_t i = 0; i < kDimensions.size(); ++i) {
    Bindings b{{"task", task_text},
               {"passage", std::string(passage)},
               {"dimension", kDimensions[i].name},
               {"dimension_description", kDimensions[i].description}};
    const std::string reply =
        ask(ctx, "writing_judge", b, fmt::format("{}/{}-{}", tag_prefix, i + 1, kDimensions[i].name)).text;
    out.replies.push_back(reply);
    const auto nums = text::numbers_in(reply);
    if (nums.empty()) {
      out.warnings.push_back(fmt::format("{}: unparseable judge reply '{}', scoring 0", kDimensions[i].name, reply));
      spdlog::warn("{}", out.warnings.back());
      continue;
    }
    scores[i] = snap_score(nums.front());
  }
  out.card = {scores[0], scores[1], scores[2], scores[3]};
  return out;
}

std::vector<Instance> parse_instances(std::string_view text) {
  std::vector<std::vector<std::string>> blocks(1);
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (text::is_blank(line)) {
      if (!blocks.back().empty()) blocks.emplace_back();
      continue;
    }
    blocks.back().push_back(text::trim_copy(line));
  }
  if (blocks.back().empty()) blocks.pop_back();
  std::vector<Instance> out;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].size() != 4) {
      fail(Errc::BadInstance, fmt::format("writing instance {} has {} sentences, expected 4", b + 1, blocks[b].size()));
    }
    Instance inst;
    for (std::size_t i = 0; i < 4; ++i) inst.end_sentences[i] = blocks[b][i];
    out.push_back(std::move(inst));
  }
  return out;
}

std::string describe(const Instance& instance) {
  std::string out =
      "Write a coherent passage of 4 short paragraphs. The end sentence of each paragraph must be, in order:\n";
  for (std::size_t i = 0; i < 4; ++i) out += fmt::format("{}. {}\n", i + 1, instance.end_sentences[i]);
  out += "Separate paragraphs with a blank line.";
  return out;
}

}  // namespace tse::writing
