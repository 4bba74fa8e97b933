// Copyright (C) 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tse::crossword {

inline constexpr int kSize = 5;
inline constexpr int kCells = kSize * kSize;

struct Instance {
  std::array<std::string, kSize> horizontal_clues;
  std::array<std::string, kSize> vertical_clues;
  std::string solution;  // 25 uppercase letters, row-major
};

struct Metrics {
  double letter_accuracy = 0.0;  // correct cells / 25
  double word_accuracy = 0.0;    // correct rows + columns / 10
  bool game_solved = false;      // letter_accuracy == 1
  int letters_correct = 0;
  int words_correct = 0;
};

/// Upper-cases and drops whitespace. Throws BadGridShape unless exactly 25
/// letters remain and nothing else was present.
std::string normalize_grid(std::string_view grid);

Metrics crossword_metrics(const Instance& instance, std::string_view proposed_grid);

/// Macro average over games: each game weighs the same.
struct Aggregate {
  double letter_accuracy = 0.0;
  double word_accuracy = 0.0;
  double game_accuracy = 0.0;
  std::size_t games = 0;
};

Aggregate aggregate(const std::vector<Metrics>& games);

/// The grid a conclusion proposes: its last five 5-letter words, or failing
/// that a run of exactly 25 letters.
std::optional<std::string> extract_grid(std::string_view sentence);

/// Blocks of 15 non-blank lines (5 across clues, 5 down clues, 5 solution
/// rows) separated by blank lines.
std::vector<Instance> parse_instances(std::string_view text);

std::string describe(const Instance& instance);

}  // namespace tse::crossword
