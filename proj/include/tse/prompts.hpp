// Copyright (C) 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace tse {

using Bindings = std::map<std::string, std::string>;

/// Template text with `{{name}}` placeholders.
struct PromptTemplate {
  std::string name;
  std::string text;

  /// Distinct placeholder names in order of first use.
  std::vector<std::string> placeholders() const;

  /// Throws TemplateError naming the first placeholder missing from `bindings`.
  std::string render(const Bindings& bindings) const;
};

/// The set of templates one run uses: system, chain_step, node_rank, fusion,
/// semantic_connect, branch_step, judge, writing_judge and alignment.
class PromptLibrary {
 public:
  /// Templates compiled in from the prompts/ directory.
  static const PromptLibrary& builtin();

  /// Loads `<dir>/<name>.txt` for every required name.
  static PromptLibrary from_directory(const std::string& dir);

  static const std::vector<std::string>& required_names();

  const PromptTemplate& get(std::string_view name) const;
  std::string render(std::string_view name, const Bindings& bindings) const;

  /// Content hash over all templates; stamped into run records.
  const std::string& version() const { return version_; }

 private:
  explicit PromptLibrary(std::map<std::string, PromptTemplate, std::less<>> templates);

  std::map<std::string, PromptTemplate, std::less<>> templates_;
  std::string version_;
};

}  // namespace tse
