// Copyright (C) 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#include "tse/prompts.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "tse/error.hpp"
#include "tse/prompt_data.hpp"
#include "tse/text.hpp"

namespace tse {

namespace {

bool is_name_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

// Calls on_text / on_placeholder over the template in order.
template <typename Text, typename Placeholder>
void scan(std::string_view t, Text on_text, Placeholder on_placeholder) {
  std::size_t i = 0;
  while (i < t.size()) {
    auto open = t.find("{{", i);
    if (open == std::string_view::npos) break;
    auto close = t.find("}}", open + 2);
    if (close == std::string_view::npos) break;
    std::string_view name = t.substr(open + 2, close - open - 2);
    bool valid = !name.empty();
    for (char c : name) valid = valid && is_name_char(c);
    if (!valid) {
      on_text(t.substr(i, open + 2 - i));
      i = open + 2;
      continue;
    }
    on_text(t.substr(i, open - i));
    on_placeholder(name);
    i = close + 2;
  }
  on_text(t.substr(i));
}

}  // namespace

std::vector<std::string> PromptTemplate::placeholders() const {
  std::vector<std::string> out;
  scan(text, [](std::string_view) {}, [&](std::string_view name) {
    if (std::find(out.begin(), out.end(), name) == out.end()) out.emplace_back(name);
  });
  return out;
}

std::string PromptTemplate::render(const Bindings& bindings) const {
  std::string out;
  scan(
      text, [&](std::string_view chunk) { out += chunk; },
      [&](std::string_view name) {
        auto it = bindings.find(std::string(name));
        if (it == bindings.end()) {
          fail(Errc::TemplateError, "template '" + this->name + "' has unbound placeholder '" +
                                        std::string(name) + "'");
        }
        out += it->second;
      });
  return out;
}

const std::vector<std::string>& PromptLibrary::required_names() {
  static const std::vector<std::string> names = {
      "system", "chain_step", "node_rank",     "fusion",   "semantic_connect",
      "branch_step", "judge", "writing_judge", "alignment"};
  return names;
}

PromptLibrary::PromptLibrary(std::map<std::string, PromptTemplate, std::less<>> templates)
    : templates_(std::move(templates)) {
  std::string material;
  for (const auto& name : required_names()) {
    auto it = templates_.find(name);
    if (it == templates_.end()) fail(Errc::TemplateError, "missing template '" + name + "'");
    material += name;
    material.push_back('\0');
    material += it->second.text;
    material.push_back('\0');
  }
  version_ = text::sha256_hex(material).substr(0, 12);
}

const PromptLibrary& PromptLibrary::builtin() {
  static const PromptLibrary lib = [] {
    std::map<std::string, PromptTemplate, std::less<>> templates;
    for (const auto& [name, body] : detail::kBuiltinPrompts) {
      templates.emplace(std::string(name), PromptTemplate{std::string(name), text::trim_copy(body)});
    }
    return PromptLibrary(std::move(templates));
  }();
  return lib;
}

PromptLibrary PromptLibrary::from_directory(const std::string& dir) {
  std::map<std::string, PromptTemplate, std::less<>> templates;
  for (const auto& name : required_names()) {
    const std::string path = dir + "/" + name + ".txt";
    std::ifstream in(path);
    if (!in) fail(Errc::Io, "cannot read template " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    templates.emplace(name, PromptTemplate{name, text::trim_copy(ss.str())});
  }
  return PromptLibrary(std::move(templates));
}

const PromptTemplate& PromptLibrary::get(std::string_view name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) fail(Errc::TemplateError, "unknown template '" + std::string(name) + "'");
  return it->second;
}

std::string PromptLibrary::render(std::string_view name, const Bindings& bindings) const {
  return get(name).render(bindings);
}

}  // namespace tse
