// Copyright (C) 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tse::text {

std::string_view trim(std::string_view s);
std::string trim_copy(std::string_view s);
bool is_blank(std::string_view s);

/// Runs of whitespace become one space; ends are trimmed.
std::string collapse_whitespace(std::string_view s);

std::string to_upper(std::string_view s);

/// Every decimal number in `s`, in order ("8/10" yields 8 and 10).
std::vector<double> numbers_in(std::string_view s);

/// First integer in `s` lying in [lo, hi]; number words ("first", "two")
/// count as well.
std::optional<int> first_int_in_range(std::string_view s, int lo, int hi);

std::string sha256_hex(std::string_view data);

std::string format_fixed(double value, int decimals);

}  // namespace tse::text
