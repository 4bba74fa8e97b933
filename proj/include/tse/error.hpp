// Copyright (C) 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tse {

enum class Errc {
  // thought graph
  EmptyChain,
  EmptyNode,
  UnknownNode,
  CycleDetected,
  InvalidBranch,
  MalformedDocument,
  // backend
  BackendUnavailable,
  FixtureMiss,
  AuthError,
  TruncatedChain,
  TemplateError,
  InvalidConfig,
  // importance
  NegativeNorm,
  ScorerUnavailable,
  ScorerShapeMismatch,
  // expansion
  TooFewChains,
  EmptyFusion,
  MissingImportance,
  TruncatedBranch,
  // collaboration
  NonFiniteLoss,
  MissingAlignment,
  NoCandidates,
  SubsetTooLarge,
  // tasks
  ParseError,
  BadGridShape,
  BadInstance,
  // runner
  MixedTasks,
  Io,
};

std::string_view to_string(Errc code);

/// Every failure raised by the library. `step` carries the 1-based step for
/// the truncation errors and `position` the byte offset for parse errors.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  Errc code() const noexcept { return code_; }

  std::optional<std::size_t> step;
  std::optional<std::size_t> position;

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace tse
