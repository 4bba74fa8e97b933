// Copyright (C) 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#include "tse/tasks/crossword.hpp"

#include <cctype>
#include <sstream>

#include <fmt/format.h>

#include "tse/error.hpp"
#include "tse/text.hpp"

namespace tse::crossword {

std::string normalize_grid(std::string_view grid) {
  std::string out;
  for (char c : grid) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isspace(u)) continue;
    if (!std::isalpha(u)) fail(Errc::BadGridShape, fmt::format("grid holds non-letter '{}'", c));
    out.push_back(static_cast<char>(std::toupper(u)));
  }
  if (out.size() != static_cast<std::size_t>(kCells)) {
    fail(Errc::BadGridShape, fmt::format("grid has {} letters, expected {}", out.size(), kCells));
  }
  return out;
}

Metrics crossword_metrics(const Instance& instance, std::string_view proposed_grid) {
  const std::string proposed = normalize_grid(proposed_grid);
  const std::string& truth = instance.solution;
  Metrics m;
  for (int i = 0; i < kCells; ++i) m.letters_correct += proposed[i] == truth[i];
  for (int r = 0; r < kSize; ++r) {
    bool row = true;
    bool col = true;
    for (int k = 0; k < kSize; ++k) {
      row = row && proposed[r * kSize + k] == truth[r * kSize + k];
      col = col && proposed[k * kSize + r] == truth[k * kSize + r];
    }
    m.words_correct += row + col;
  }
  m.letter_accuracy = m.letters_correct / static_cast<double>(kCells);
  m.word_accuracy = m.words_correct / static_cast<double>(2 * kSize);
  m.game_solved = m.letters_correct == kCells;
  return m;
}

Aggregate aggregate(const std::vector<Metrics>& games) {
  Aggregate a;
  a.games = games.size();
  if (games.empty()) return a;
  for (const auto& g : games) {
    a.letter_accuracy += g.letter_accuracy;
    a.word_accuracy += g.word_accuracy;
    a.game_accuracy += g.game_solved ? 1.0 : 0.0;
  }
  const double n = static_cast<double>(games.size());
  a.letter_accuracy /= n;
  a.word_accuracy /= n;
  a.game_accuracy /= n;
  return a;
}

std::optional<std::string> extract_grid(std::string_view sentence) {
  std::vector<std::string> words;
  std::string current;
  std::string run;
  auto flush = [&] {
    if (current.size() == static_cast<std::size_t>(kSize)) words.push_back(text::to_upper(current));
    if (current.size() == static_cast<std::size_t>(kCells)) run = text::to_upper(current);
    current.clear();
  };
  for (char c : sentence) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      current.push_back(c);
    } else {
      flush();
    }
  }
  flush();
  if (words.size() >= static_cast<std::size_t>(kSize)) {
    std::string grid;
    for (std::size_t i = words.size() - kSize; i < words.size(); ++i) grid += words[i];
    return grid;
  }
  if (!run.empty()) return run;
  return std::nullopt;
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
    const auto& lines = blocks[b];
    if (lines.size() != 15) {
      fail(Errc::BadInstance, fmt::format("crossword {} has {} lines, expected 15", b + 1, lines.size()));
    }
    Instance inst;
    for (int i = 0; i < kSize; ++i) {
      inst.horizontal_clues[i] = lines[i];
      inst.vertical_clues[i] = lines[kSize + i];
    }
    std::string rows;
    for (int i = 0; i < kSize; ++i) rows += lines[2 * kSize + i];
    try {
      inst.solution = normalize_grid(rows);
    } catch (const Error& e) {
      fail(Errc::BadInstance, fmt::format("crossword {}: {}", b + 1, e.what()));
    }
    out.push_back(std::move(inst));
  }
  return out;
}

std::string describe(const Instance& instance) {
  std::string out = "Solve this 5x5 mini crossword. Across clues:\n";
  for (int i = 0; i < kSize; ++i) out += fmt::format("h{}. {}\n", i + 1, instance.horizontal_clues[i]);
  out += "Down clues:\n";
  for (int i = 0; i < kSize; ++i) out += fmt::format("v{}. {}\n", i + 1, instance.vertical_clues[i]);
  out += "Give the final answer as five 5-letter words, one per row, top to bottom.";
  return out;
}

}  // namespace tse::crossword
