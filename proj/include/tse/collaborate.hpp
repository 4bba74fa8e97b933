// Copyright (C) 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tse/generation.hpp"
#include "tse/importance.hpp"
#include "tse/thought_graph.hpp"

namespace tse {

struct CandidateAnswer {
  std::string text;
  std::set<ChainId> source_chain_ids;

  bool operator==(const CandidateAnswer&) const = default;
};

/// How a task turns a conclusion sentence into a candidate. When
/// `mergeable` is false every chain keeps its own candidate.
struct AnswerKey {
  std::function<std::string(const std::string& conclusion)> canonicalize;
  bool mergeable = true;
};

/// Candidates from the conclusions of `chain_ids`, merged by canonical text.
std::vector<CandidateAnswer> collect_candidates(const ThoughtStructure& structure,
                                                const std::vector<ChainId>& chain_ids,
                                                const AnswerKey& key);

struct NodeWeight {
  NodeId node_id = 0;
  double loss = 0.0;
  double weight = 0.0;
};

struct ReasoningScore {
  CandidateAnswer candidate;
  double score = 0.0;
};

enum class CollabMethod { Cws, Judge, Majority, RandomSample, NewOnly };

std::string_view to_string(CollabMethod method);
CollabMethod collab_from_string(std::string_view name);

struct Verdict {
  CandidateAnswer decision;
  CollabMethod method = CollabMethod::Majority;
  std::vector<ReasoningScore> scores;
  nlohmann::json audit = nlohmann::json::object();
  std::vector<std::string> warnings;
};

nlohmann::json to_json(const Verdict& verdict);

/// softmax(-L): exp(-L_k) / sum exp(-L). Computed after subtracting the
/// smallest loss. NonFiniteLoss on empty or non-finite input.
std::vector<double> compute_weights(std::span<const double> losses);

/// Alignment of a key node with a candidate, in [0, 1].
using AlignmentTable = std::map<std::pair<NodeId, std::string>, double>;

/// C(q) = sum over key nodes of w * alignment(node, q).
std::vector<ReasoningScore> collaborative_score(const std::vector<CandidateAnswer>& candidates,
                                                const std::vector<NodeWeight>& weights,
                                                const AlignmentTable& alignments);

/// Highest score; ties go to the candidate with more source chains, then to
/// the lexicographically smallest text. NoCandidates when empty.
Verdict decide(std::vector<ReasoningScore> scores, CollabMethod method);

/// Asks the model for an alignment in [0, 1]; unparseable replies count 0.
double ask_alignment(const LlmContext& ctx, const std::string& task_text, const std::string& step,
                     const std::string& candidate, const std::string& tag, std::vector<std::string>& warnings);

/// Collaborative weighted summation over every chain of the expanded
/// structure: re-score, one key node per chain, softmax weights over the
/// chains' losses, model-rated alignments, argmax.
Verdict collaborative_weighted_summation(const ThoughtStructure& structure, const LlmContext& ctx,
                                         const std::string& task_text, Scorer& scorer, const AnswerKey& key,
                                         int workers = 1);

/// Scores each chain 0-10 with the judge template; a candidate takes the
/// best score among its chains.
Verdict judge_and_vote(const ThoughtStructure& structure, const std::vector<ChainId>& chain_ids,
                       const LlmContext& ctx, const std::string& task_text, const AnswerKey& key,
                       int workers = 1);

/// Most frequent canonical answer.
Verdict majority_vote(const std::vector<CandidateAnswer>& candidates, CollabMethod method = CollabMethod::Majority);

/// Seeded uniform k-subset, returned in chain order. SubsetTooLarge if k
/// exceeds the number of chains.
std::vector<ChainId> sample_subset(const std::vector<ChainId>& chain_ids, std::size_t k, std::uint64_t seed);

std::vector<ChainId> new_chains_only(const ThoughtStructure& structure);

}  // namespace tse
