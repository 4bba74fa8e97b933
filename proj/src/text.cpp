// Copyright (C) 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#include "tse/text.hpp"

#include <array>
#include <cctype>
#include <cstdlib>

#include <fmt/format.h>
#include <openssl/evp.h>

namespace tse::text {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

struct NumberWord {
  std::string_view word;
  int value;
};

constexpr std::array<NumberWord, 20> kNumberWords{{
    {"one", 1},   {"first", 1},  {"two", 2},     {"second", 2}, {"three", 3},
    {"third", 3}, {"four", 4},   {"fourth", 4},  {"five", 5},   {"fifth", 5},
    {"six", 6},   {"sixth", 6},  {"seven", 7},   {"seventh", 7}, {"eight", 8},
    {"eighth", 8}, {"nine", 9},  {"ninth", 9},   {"ten", 10},   {"tenth", 10},
}};

}  // namespace

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string trim_copy(std::string_view s) { return std::string(trim(s)); }

bool is_blank(std::string_view s) { return trim(s).empty(); }

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : trim(s)) {
    if (is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::string to_upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::vector<double> numbers_in(std::string_view s) {
  std::vector<double> out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!is_digit(s[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && is_digit(s[j])) ++j;
    if (j + 1 < s.size() && s[j] == '.' && is_digit(s[j + 1])) {
      ++j;
      while (j < s.size() && is_digit(s[j])) ++j;
    }
    out.push_back(std::strtod(std::string(s.substr(i, j - i)).c_str(), nullptr));
    i = j;
  }
  return out;
}

std::optional<int> first_int_in_range(std::string_view s, int lo, int hi) {
  std::size_t i = 0;
  while (i < s.size()) {
    if (is_digit(s[i])) {
      std::size_t j = i;
      while (j < s.size() && is_digit(s[j])) ++j;
      // Decimals like "2.5" are not indices.
      bool decimal = j + 1 < s.size() && s[j] == '.' && is_digit(s[j + 1]);
      if (!decimal && j - i <= 9) {
        int value = std::atoi(std::string(s.substr(i, j - i)).c_str());
        if (value >= lo && value <= hi) return value;
      }
      while (j < s.size() && (is_digit(s[j]) || s[j] == '.')) ++j;
      i = j;
      continue;
    }
    if (is_alpha(s[i])) {
      std::size_t j = i;
      while (j < s.size() && is_alpha(s[j])) ++j;
      std::string word(s.substr(i, j - i));
      for (char& c : word) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      for (const auto& nw : kNumberWords) {
        if (nw.word == word && nw.value >= lo && nw.value <= hi) return nw.value;
      }
      i = j;
      continue;
    }
    ++i;
  }
  return std::nullopt;
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr);
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
  return out;
}

std::string format_fixed(double value, int decimals) {
  return fmt::format("{:.{}f}", value, decimals);
}

}  // namespace tse::text
