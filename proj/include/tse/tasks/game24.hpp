// Copyright (C) 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/rational.hpp>

namespace tse::game24 {

using Rational = boost::rational<std::int64_t>;

struct Instance {
  std::array<std::int64_t, 4> numbers{};

  bool operator==(const Instance&) const = default;
};

/// Binary expression tree. A leaf has op == 0 and holds `value`; an inner
/// node holds one of + - * / and exactly two children.
struct Expr {
  char op = 0;
  std::int64_t value = 0;
  std::vector<Expr> kids;

  static Expr leaf(std::int64_t v) { return Expr{0, v, {}}; }
  static Expr node(char op, Expr lhs, Expr rhs);

  bool is_leaf() const { return op == 0; }
  const Expr& lhs() const { return kids[0]; }
  const Expr& rhs() const { return kids[1]; }

  bool operator==(const Expr&) const = default;
};

/// Infix arithmetic over positive integer literals with + - * / and
/// parentheses. Also accepts the typographic operators × ÷ − and a bare "x"
/// for multiplication. ParseError (with `position`) on anything else.
Expr parse_expression(std::string_view text);

/// Exact value, or nullopt on division by zero or int64 overflow.
std::optional<Rational> evaluate(const Expr& expr);

std::vector<std::int64_t> leaves(const Expr& expr);

/// Fully parenthesized, outermost pair dropped.
std::string to_string(const Expr& expr);

/// to_string() after sorting the operands of + and * recursively, so
/// commuted forms of one expression print the same.
std::string canonical_form(const Expr& expr);

/// Uses each instance number exactly once and evaluates to exactly 24.
bool verify_24(const Instance& instance, const Expr& expr);

/// Exhaustive search over every ordering, operator choice and tree shape
/// (24 x 64 x 5 = 7,680 candidates). Returns a witness if one exists.
std::optional<Expr> solve_24_oracle(const Instance& instance);

/// Finds the expression a model's conclusion sentence proposes, e.g.
/// "Answer: (6 - 4) * (8 + 4) = 24". Prefers a candidate with four leaves.
std::optional<Expr> extract_expression(std::string_view sentence);

/// One instance per non-blank line, four integers separated by spaces.
std::vector<Instance> parse_instances(std::string_view text);

std::string describe(const Instance& instance);

}  // namespace tse::game24
