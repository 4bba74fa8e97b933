// Copyright (C) 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#include "tse/error.hpp"

namespace tse {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::EmptyChain: return "EmptyChain";
    case Errc::EmptyNode: return "EmptyNode";
    case Errc::UnknownNode: return "UnknownNode";
    case Errc::CycleDetected: return "CycleDetected";
    case Errc::InvalidBranch: return "InvalidBranch";
    case Errc::MalformedDocument: return "MalformedDocument";
    case Errc::BackendUnavailable: return "BackendUnavailable";
    case Errc::FixtureMiss: return "FixtureMiss";
    case Errc::AuthError: return "AuthError";
    case Errc::TruncatedChain: return "TruncatedChain";
    case Errc::TemplateError: return "TemplateError";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::NegativeNorm: return "NegativeNorm";
    case Errc::ScorerUnavailable: return "ScorerUnavailable";
    case Errc::ScorerShapeMismatch: return "ScorerShapeMismatch";
    case Errc::TooFewChains: return "TooFewChains";
    case Errc::EmptyFusion: return "EmptyFusion";
    case Errc::MissingImportance: return "MissingImportance";
    case Errc::TruncatedBranch: return "TruncatedBranch";
    case Errc::NonFiniteLoss: return "NonFiniteLoss";
    case Errc::MissingAlignment: return "MissingAlignment";
    case Errc::NoCandidates: return "NoCandidates";
    case Errc::SubsetTooLarge: return "SubsetTooLarge";
    case Errc::ParseError: return "ParseError";
    case Errc::BadGridShape: return "BadGridShape";
    case Errc::BadInstance: return "BadInstance";
    case Errc::MixedTasks: return "MixedTasks";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace tse
