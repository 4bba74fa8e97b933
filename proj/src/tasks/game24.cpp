// Copyright (C) 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#include "tse/tasks/game24.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "tse/error.hpp"
#include "tse/text.hpp"

namespace tse::game24 {

Expr Expr::node(char op, Expr lhs, Expr rhs) {
  Expr e;
  e.op = op;
  e.kids.push_back(std::move(lhs));
  e.kids.push_back(std::move(rhs));
  return e;
}

namespace {

constexpr std::size_t kMaxLiteralDigits = 6;

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  Expr parse() {
    Expr e = expr();
    skip_space();
    if (pos_ != s_.size()) error("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void error(const std::string& what) const {
    Error e(Errc::ParseError, fmt::format("{} at position {}", what, pos_));
    e.position = pos_;
    throw e;
  }

  void skip_space() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' || s_[pos_] == '\r')) ++pos_;
  }

  bool starts_with(std::string_view token) const { return s_.substr(pos_, token.size()) == token; }

  // Recognizes an operator at the cursor, consuming it.
  std::optional<char> take_op(bool additive) {
    skip_space();
    if (pos_ >= s_.size()) return std::nullopt;
    if (additive) {
      if (s_[pos_] == '+' || s_[pos_] == '-') return s_[pos_++];
      if (starts_with("\xE2\x88\x92")) {  // U+2212 minus sign
        pos_ += 3;
        return '-';
      }
    } else {
      if (s_[pos_] == '*' || s_[pos_] == '/' || s_[pos_] == 'x' || s_[pos_] == 'X') {
        char c = s_[pos_++];
        return c == '/' ? '/' : '*';
      }
      if (starts_with("\xC3\x97")) {  // U+00D7 multiplication sign
        pos_ += 2;
        return '*';
      }
      if (starts_with("\xC3\xB7")) {  // U+00F7 division sign
        pos_ += 2;
        return '/';
      }
    }
    return std::nullopt;
  }

  Expr expr() {
    Expr lhs = term();
    while (auto op = take_op(true)) lhs = Expr::node(*op, std::move(lhs), term());
    return lhs;
  }

  Expr term() {
    Expr lhs = factor();
    while (auto op = take_op(false)) lhs = Expr::node(*op, std::move(lhs), factor());
    return lhs;
  }

  Expr factor() {
    skip_space();
    if (pos_ >= s_.size()) error("unexpected end of input");
    if (s_[pos_] == '(') {
      ++pos_;
      Expr inner = expr();
      skip_space();
      if (pos_ >= s_.size() || s_[pos_] != ')') error("expected ')'");
      ++pos_;
      return inner;
    }
    if (s_[pos_] >= '0' && s_[pos_] <= '9') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && s_[pos_] >= '0' && s_[pos_] <= '9') ++pos_;
      if (pos_ < s_.size() && (s_[pos_] == '.' || s_[pos_] == ',')) error("non-integer literal");
      if (pos_ - start > kMaxLiteralDigits) error("literal too large");
      return Expr::leaf(std::stoll(std::string(s_.substr(start, pos_ - start))));
    }
    error(fmt::format("unexpected character '{}'", s_[pos_]));
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

// Rational arithmetic that reports int64 overflow instead of wrapping.
std::optional<Rational> checked_add(const Rational& a, const Rational& b) {
  const std::int64_t g = std::gcd(a.denominator(), b.denominator());
  std::int64_t n1, n2, n, d;
  if (__builtin_mul_overflow(a.numerator(), b.denominator() / g, &n1) ||
      __builtin_mul_overflow(b.numerator(), a.denominator() / g, &n2) ||
      __builtin_add_overflow(n1, n2, &n) ||
      __builtin_mul_overflow(a.denominator(), b.denominator() / g, &d)) {
    return std::nullopt;
  }
  return Rational(n, d);
}

std::optional<Rational> checked_mul(const Rational& a, const Rational& b) {
  const std::int64_t g1 = std::gcd(a.numerator(), b.denominator());
  const std::int64_t g2 = std::gcd(b.numerator(), a.denominator());
  std::int64_t n, d;
  if (__builtin_mul_overflow(a.numerator() / (g1 ? g1 : 1), b.numerator() / (g2 ? g2 : 1), &n) ||
      __builtin_mul_overflow(a.denominator() / (g2 ? g2 : 1), b.denominator() / (g1 ? g1 : 1), &d)) {
    return std::nullopt;
  }
  return Rational(n, d);
}

std::optional<Rational> apply(char op, const Rational& a, const Rational& b) {
  switch (op) {
    case '+': return checked_add(a, b);
    case '-': return checked_add(a, -b);
    case '*': return checked_mul(a, b);
    case '/':
      // Compare parts, not `b == 0`: Boost 1.74's rational-vs-integer
      // operators recurse forever under C++20 rewritten comparisons.
      if (b.numerator() == 0) return std::nullopt;
      return checked_mul(a, Rational(b.denominator(), b.numerator()));
  }
  return std::nullopt;
}

void collect_leaves(const Expr& e, std::vector<std::int64_t>& out) {
  if (e.is_leaf()) {
    out.push_back(e.value);
    return;
  }
  for (const auto& k : e.kids) collect_leaves(k, out);
}

std::string print(const Expr& e, bool top) {
  if (e.is_leaf()) return std::to_string(e.value);
  std::string body = print(e.lhs(), false) + e.op + print(e.rhs(), false);
  return top ? body : "(" + body + ")";
}

Expr canonicalize(const Expr& e) {
  if (e.is_leaf()) return e;
  Expr lhs = canonicalize(e.lhs());
  Expr rhs = canonicalize(e.rhs());
  if ((e.op == '+' || e.op == '*') && print(rhs, false) < print(lhs, false)) std::swap(lhs, rhs);
  return Expr::node(e.op, std::move(lhs), std::move(rhs));
}

}  // namespace

Expr parse_expression(std::string_view text) { return Parser(text).parse(); }

std::optional<Rational> evaluate(const Expr& expr) {
  if (expr.is_leaf()) return Rational(expr.value);
  auto a = evaluate(expr.lhs());
  if (!a) return std::nullopt;
  auto b = evaluate(expr.rhs());
  if (!b) return std::nullopt;
  return apply(expr.op, *a, *b);
}

std::vector<std::int64_t> leaves(const Expr& expr) {
  std::vector<std::int64_t> out;
  collect_leaves(expr, out);
  return out;
}

std::string to_string(const Expr& expr) { return print(expr, true); }

std::string canonical_form(const Expr& expr) { return print(canonicalize(expr), true); }

bool verify_24(const Instance& instance, const Expr& expr) {
  auto used = leaves(expr);
  if (used.size() != instance.numbers.size()) return false;
  std::vector<std::int64_t> given(instance.numbers.begin(), instance.numbers.end());
  std::sort(used.begin(), used.end());
  std::sort(given.begin(), given.end());
  if (used != given) return false;
  auto value = evaluate(expr);
  return value && *value == Rational(24);
}

std::optional<Expr> solve_24_oracle(const Instance& instance) {
  static constexpr std::array<char, 4> kOps{'+', '-', '*', '/'};
  std::array<std::int64_t, 4> perm = instance.numbers;
  std::sort(perm.begin(), perm.end());
  const Rational target(24);

  do {
    const Rational a(perm[0]), b(perm[1]), c(perm[2]), d(perm[3]);
    for (char o1 : kOps) {
      for (char o2 : kOps) {
        for (char o3 : kOps) {
          auto L = [](std::int64_t v) { return Expr::leaf(v); };
          // ((a o1 b) o2 c) o3 d
          if (auto ab = apply(o1, a, b)) {
            if (auto abc = apply(o2, *ab, c)) {
              if (auto v = apply(o3, *abc, d); v && *v == target) {
                return Expr::node(o3, Expr::node(o2, Expr::node(o1, L(perm[0]), L(perm[1])), L(perm[2])), L(perm[3]));
              }
            }
          }
          // (a o1 (b o2 c)) o3 d
          if (auto bc = apply(o2, b, c)) {
            if (auto abc = apply(o1, a, *bc)) {
              if (auto v = apply(o3, *abc, d); v && *v == target) {
                return Expr::node(o3, Expr::node(o1, L(perm[0]), Expr::node(o2, L(perm[1]), L(perm[2]))), L(perm[3]));
              }
            }
          }
          // (a o1 b) o2 (c o3 d)
          if (auto ab = apply(o1, a, b)) {
            if (auto cd = apply(o3, c, d)) {
              if (auto v = apply(o2, *ab, *cd); v && *v == target) {
                return Expr::node(o2, Expr::node(o1, L(perm[0]), L(perm[1])), Expr::node(o3, L(perm[2]), L(perm[3])));
              }
            }
          }
          // a o1 ((b o2 c) o3 d)
          if (auto bc = apply(o2, b, c)) {
            if (auto bcd = apply(o3, *bc, d)) {
              if (auto v = apply(o1, a, *bcd); v && *v == target) {
                return Expr::node(o1, L(perm[0]), Expr::node(o3, Expr::node(o2, L(perm[1]), L(perm[2])), L(perm[3])));
              }
            }
          }
          // a o1 (b o2 (c o3 d))
          if (auto cd = apply(o3, c, d)) {
            if (auto bcd = apply(o2, b, *cd)) {
              if (auto v = apply(o1, a, *bcd); v && *v == target) {
                return Expr::node(o1, L(perm[0]), Expr::node(o2, L(perm[1]), Expr::node(o3, L(perm[2]), L(perm[3]))));
              }
            }
          }
        }
      }
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::nullopt;
}

std::optional<Expr> extract_expression(std::string_view sentence) {
  // Split the sentence into runs of expression characters; '=' and prose
  // end a run. A bare 'x' only counts as an operator between operands.
  std::vector<std::string> runs;
  std::string current;
  auto flush = [&] {
    if (!text::is_blank(current)) runs.push_back(text::trim_copy(current));
    current.clear();
  };
  auto last_solid = [&]() -> char {
    for (auto it = current.rbegin(); it != current.rend(); ++it) {
      if (*it != ' ') return *it;
    }
    return 0;
  };
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    const char c = sentence[i];
    const std::string_view rest = sentence.substr(i);
    if ((c >= '0' && c <= '9') || c == ' ' || c == '+' || c == '-' || c == '*' || c == '/' || c == '(' ||
        c == ')') {
      current.push_back(c);
    } else if (rest.starts_with("\xC3\x97") || rest.starts_with("\xC3\xB7")) {
      current.append(rest.substr(0, 2));
      ++i;
    } else if (rest.starts_with("\xE2\x88\x92")) {
      current.append(rest.substr(0, 3));
      i += 2;
    } else if ((c == 'x' || c == 'X') && (std::isdigit(static_cast<unsigned char>(last_solid())) || last_solid() == ')')) {
      current.push_back('*');
    } else {
      flush();
    }
  }
  flush();

  std::optional<Expr> best;
  std::size_t best_leaves = 0;
  for (const auto& run : runs) {
    // Strip stray parentheses left over from prose like "(answer: ...)".
    std::string candidate = run;
    for (int attempt = 0; attempt < 3; ++attempt) {
      try {
        Expr e = parse_expression(candidate);
        const std::size_t n = leaves(e).size();
        if (n > best_leaves) {
          best = std::move(e);
          best_leaves = n;
        }
        break;
      } catch (const Error&) {
        const auto opens = std::count(candidate.begin(), candidate.end(), '(');
        const auto closes = std::count(candidate.begin(), candidate.end(), ')');
        if (opens > closes && !candidate.empty() && candidate.front() == '(') {
          candidate = text::trim_copy(std::string_view(candidate).substr(1));
        } else if (closes > opens && !candidate.empty() && candidate.back() == ')') {
          candidate = text::trim_copy(std::string_view(candidate).substr(0, candidate.size() - 1));
        } else {
          break;
        }
      }
    }
  }
  return best;
}

std::vector<Instance> parse_instances(std::string_view text) {
  std::vector<Instance> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::is_blank(line)) continue;
    std::istringstream fields(line);
    std::vector<std::int64_t> nums;
    std::string tok;
    while (fields >> tok) {
      try {
        std::size_t used = 0;
        long long v = std::stoll(tok, &used);
        if (used != tok.size() || v <= 0) throw std::invalid_argument(tok);
        nums.push_back(v);
      } catch (const std::exception&) {
        fail(Errc::BadInstance, fmt::format("line {}: '{}' is not a positive integer", line_no, tok));
      }
    }
    if (nums.size() != 4) fail(Errc::BadInstance, fmt::format("line {}: expected 4 numbers, got {}", line_no, nums.size()));
    Instance inst;
    std::copy(nums.begin(), nums.end(), inst.numbers.begin());
    out.push_back(inst);
  }
  return out;
}

std::string describe(const Instance& instance) {
  return fmt::format("{} {} {} {}", instance.numbers[0], instance.numbers[1], instance.numbers[2],
                     instance.numbers[3]);
}

}  // namespace tse::game24
