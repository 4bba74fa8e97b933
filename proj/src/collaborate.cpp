// Copyright (C) 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#include "tse/collaborate.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "tse/error.hpp"
#include "tse/parallel.hpp"
#include "tse/rng.hpp"
#include "tse/text.hpp"

namespace tse {

using nlohmann::json;

std::string_view to_string(CollabMethod method) {
  switch (method) {
    case CollabMethod::Cws: return "cws";
    case CollabMethod::Judge: return "judge";
    case CollabMethod::Majority: return "majority";
    case CollabMethod::RandomSample: return "random_sample";
    case CollabMethod::NewOnly: return "new_only";
  }
  return "majority";
}

CollabMethod collab_from_string(std::string_view name) {
  if (name == "cws") return CollabMethod::Cws;
  if (name == "judge") return CollabMethod::Judge;
  if (name == "majority") return CollabMethod::Majority;
  if (name == "random_sample") return CollabMethod::RandomSample;
  if (name == "new_only") return CollabMethod::NewOnly;
  fail(Errc::InvalidConfig, "unknown collaboration method '" + std::string(name) + "'");
}

namespace {

json candidate_json(const CandidateAnswer& c) {
  return {{"text", c.text}, {"source_chain_ids", std::vector<ChainId>(c.source_chain_ids.begin(), c.source_chain_ids.end())}};
}

}  // namespace

json to_json(const Verdict& v) {
  json scores = json::array();
  for (const auto& s : v.scores) scores.push_back({{"candidate", candidate_json(s.candidate)}, {"score", s.score}});
  return {{"decision", candidate_json(v.decision)},
          {"method", to_string(v.method)},
          {"scores", std::move(scores)},
          {"audit", v.audit},
          {"warnings", v.warnings}};
}

std::vector<CandidateAnswer> collect_candidates(const ThoughtStructure& structure,
                                                const std::vector<ChainId>& chain_ids, const AnswerKey& key) {
  std::vector<CandidateAnswer> out;
  for (ChainId id : chain_ids) {
    const auto& chain = structure.chain(id);
    const std::string text = key.canonicalize(structure.node(chain.node_ids.back()).text);
    auto it = key.mergeable ? std::find_if(out.begin(), out.end(), [&](const CandidateAnswer& c) { return c.text == text; })
                            : out.end();
    if (it == out.end()) {
      out.push_back({text, {id}});
    } else {
      it->source_chain_ids.insert(id);
    }
  }
  return out;
}

std::vector<double> compute_weights(std::span<const double> losses) {
  if (losses.empty()) fail(Errc::NonFiniteLoss, "no losses to weight");
  double lowest = losses[0];
  for (double l : losses) {
    if (!std::isfinite(l)) fail(Errc::NonFiniteLoss, fmt::format("loss {} is not finite", l));
    lowest = std::min(lowest, l);
  }
  std::vector<double> w(losses.size());
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(-(losses[i] - lowest));
    total += w[i];
  }
  for (double& x : w) x /= total;
  return w;
}

std::vector<ReasoningScore> collaborative_score(const std::vector<CandidateAnswer>& candidates,
                                                const std::vector<NodeWeight>& weights,
                                                const AlignmentTable& alignments) {
  std::vector<ReasoningScore> out;
  for (const auto& c : candidates) {
    double total = 0.0;
    for (const auto& w : weights) {
      auto it = alignments.find({w.node_id, c.text});
      if (it == alignments.end()) {
        fail(Errc::MissingAlignment, fmt::format("no alignment for node {} and candidate '{}'", w.node_id, c.text));
      }
      total += w.weight * it->second;
    }
    out.push_back({c, total});
  }
  return out;
}

Verdict decide(std::vector<ReasoningScore> scores, CollabMethod method) {
  if (scores.empty()) fail(Errc::NoCandidates, "nothing to decide between");
  auto better = [](const ReasoningScore& a, const ReasoningScore& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.candidate.source_chain_ids.size() != b.candidate.source_chain_ids.size()) {
      return a.candidate.source_chain_ids.size() > b.candidate.source_chain_ids.size();
    }
    return a.candidate.text < b.candidate.text;
  };
  auto best = std::min_element(scores.begin(), scores.end(),
                               [&](const ReasoningScore& a, const ReasoningScore& b) { return better(a, b); });
  Verdict v;
  v.decision = best->candidate;
  v.method = method;
  v.scores = std::move(scores);
  return v;
}

double ask_alignment(const LlmContext& ctx, const std::string& task_text, const std::string& step,
                     const std::string& candidate, const std::string& tag, std::vector<std::string>& warnings) {
  const std::string reply =
      ask(ctx, "alignment", {{"task", task_text}, {"step", step}, {"candidate", candidate}}, tag).text;
  auto nums = text::numbers_in(reply);
  if (nums.empty()) {
    warnings.push_back(fmt::format("{}: unparseable alignment '{}', using 0", tag, reply));
    spdlog::warn("{}", warnings.back());
    return 0.0;
  }
  double v = nums.front();
  // Some models answer on a 0-10 scale.
  if (v > 1.0 && v <= 10.0) v /= 10.0;
  return std::clamp(v, 0.0, 1.0);
}

Verdict collaborative_weighted_summation(const ThoughtStructure& structure, const LlmContext& ctx,
                                         const std::string& task_text, Scorer& scorer, const AnswerKey& key,
                                         int workers) {
  std::vector<ChainId> all;
  for (const auto& c : structure.chains()) all.push_back(c.chain_id);
  auto candidates = collect_candidates(structure, all, key);
  if (candidates.empty()) fail(Errc::NoCandidates, "structure has no chains");

  const ImportanceTable table = score_chains(structure, scorer, all);
  std::vector<NodeWeight> weights;
  std::vector<double> losses;
  for (ChainId id : all) {
    const auto& chain = structure.chain(id);
    std::vector<double> imps;
    for (NodeId nid : chain.node_ids) imps.push_back(table.scores.at(nid).normalized_importance);
    weights.push_back({chain.node_ids[argmax_first(imps)], table.losses.at(id), 0.0});
    losses.push_back(table.losses.at(id));
  }
  const auto w = compute_weights(losses);
  for (std::size_t i = 0; i < weights.size(); ++i) weights[i].weight = w[i];

  // One alignment per (key node, candidate), fanned out and folded in order.
  const std::size_t nc = candidates.size();
  std::vector<double> values(weights.size() * nc, 0.0);
  std::vector<std::vector<std::string>> warn(values.size());
  parallel_for_all(values.size(), workers, [&](std::size_t idx) {
    const std::size_t i = idx / nc;
    const std::size_t j = idx % nc;
    values[idx] = ask_alignment(ctx, task_text, structure.node(weights[i].node_id).text, candidates[j].text,
                                fmt::format("4-collab/align/c{}/q{}", pad(all[i]), pad(j + 1)), warn[idx]);
  });

  AlignmentTable alignments;
  json audit_nodes = json::array();
  for (std::size_t i = 0; i < weights.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < nc; ++j) {
      alignments[{weights[i].node_id, candidates[j].text}] = values[i * nc + j];
      row.push_back(values[i * nc + j]);
    }
    audit_nodes.push_back({{"chain_id", all[i]},
                           {"key_node", weights[i].node_id},
                           {"loss", weights[i].loss},
                           {"weight", weights[i].weight},
                           {"alignments", std::move(row)}});
  }

  Verdict v = decide(collaborative_score(candidates, weights, alignments), CollabMethod::Cws);
  v.audit = {{"key_nodes", std::move(audit_nodes)}, {"importances", to_json(table)}};
  for (const auto& ws : warn) v.warnings.insert(v.warnings.end(), ws.begin(), ws.end());
  return v;
}

Verdict judge_and_vote(const ThoughtStructure& structure, const std::vector<ChainId>& chain_ids,
                       const LlmContext& ctx, const std::string& task_text, const AnswerKey& key, int workers) {
  if (chain_ids.empty()) fail(Errc::NoCandidates, "no chains to judge");
  std::vector<double> chain_scores(chain_ids.size(), 0.0);
  std::vector<std::string> replies(chain_ids.size());
  std::vector<std::string> warnings(chain_ids.size());
  parallel_for_all(chain_ids.size(), workers, [&](std::size_t i) {
    const std::string chain_text = numbered_list(structure.path_texts(chain_ids[i]));
    replies[i] = ask(ctx, "judge", {{"task", task_text}, {"chain_text", chain_text}},
                     fmt::format("4-collab/judge/c{}", pad(chain_ids[i])))
                     .text;
    auto nums = text::numbers_in(replies[i]);
    if (nums.empty()) {
      warnings[i] = fmt::format("chain {}: unparseable judge reply '{}', scoring 0", chain_ids[i], replies[i]);
      spdlog::warn("{}", warnings[i]);
      return;
    }
    chain_scores[i] = nums.front();
  });

  auto candidates = collect_candidates(structure, chain_ids, key);
  std::vector<ReasoningScore> scores;
  for (const auto& c : candidates) {
    double best = 0.0;
    bool first = true;
    for (std::size_t i = 0; i < chain_ids.size(); ++i) {
      if (c.source_chain_ids.count(chain_ids[i]) == 0) continue;
      best = first ? chain_scores[i] : std::max(best, chain_scores[i]);
      first = false;
    }
    scores.push_back({c, best});
  }

  Verdict v = decide(std::move(scores), CollabMethod::Judge);
  json audit = json::array();
  for (std::size_t i = 0; i < chain_ids.size(); ++i) {
    audit.push_back({{"chain_id", chain_ids[i]}, {"reply", replies[i]}, {"score", chain_scores[i]}});
  }
  v.audit = {{"judgements", std::move(audit)}};
  for (auto& w : warnings) {
    if (!w.empty()) v.warnings.push_back(std::move(w));
  }
  return v;
}

Verdict majority_vote(const std::vector<CandidateAnswer>& candidates, CollabMethod method) {
  std::vector<ReasoningScore> scores;
  for (const auto& c : candidates) scores.push_back({c, static_cast<double>(c.source_chain_ids.size())});
  return decide(std::move(scores), method);
}

std::vector<ChainId> sample_subset(const std::vector<ChainId>& chain_ids, std::size_t k, std::uint64_t seed) {
  if (k > chain_ids.size()) {
    fail(Errc::SubsetTooLarge, fmt::format("cannot sample {} of {} chains", k, chain_ids.size()));
  }
  std::vector<ChainId> shuffled = chain_ids;
  SeededRng rng(seed);
  rng.shuffle(shuffled);
  shuffled.resize(k);
  std::vector<ChainId> out;
  for (ChainId id : chain_ids) {
    if (std::find(shuffled.begin(), shuffled.end(), id) != shuffled.end()) out.push_back(id);
  }
  return out;
}

std::vector<ChainId> new_chains_only(const ThoughtStructure& structure) {
  return structure.chain_ids(ChainKind::NewBranch);
}

}  // namespace tse
