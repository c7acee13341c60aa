#include "grounding/voting.hpp"

#include <algorithm>
#include <stdexcept>

namespace grounding {

std::string_view agent_name(AgentId id) {
  static constexpr std::array<std::string_view, 13> names = {
      "1.1", "1.2", "1.3", "1.4", "1.5", "1.6", "1.7", "1.8", "2.1", "2.2", "2.3", "2.4", "2.5",
  };
  return names.at(static_cast<std::size_t>(id));
}

std::size_t sample_size(AgentId id) {
  switch (id) {
    case AgentId::a2_1: return 10;
    case AgentId::a2_2: return 20;
    case AgentId::a2_3: return 50;
    case AgentId::a2_4: return 100;
    case AgentId::a2_5: return 200;
    default: return 0;
  }
}

VoteSet argmax_labels(const LabelScores& scores) {
  VoteSet out;
  if (scores.empty()) return out;
  double best = scores.begin()->second;
  for (const auto& [_, s] : scores) best = std::max(best, s);
  for (const auto& [label, s] : scores) {
    if (s >= best - kTieTolerance) out.push_back(label);
  }
  return out;
}

std::vector<WordCandidate> build_candidates(std::span<const DescriptiveWord> words, const LexiconDb& db) {
  std::vector<WordCandidate> out;
  out.reserve(words.size());
  for (const auto& w : words) {
    auto top = db.top_label(w.word);
    if (!top) continue;
    out.push_back({w.word, w.probability, top->label, top->percentage});
  }
  return out;
}

LabelScores candidate_appearances(std::span<const WordCandidate> candidates) {
  LabelScores s;
  for (const auto& c : candidates) s[c.label] += 1.0;
  return s;
}

LabelScores accumulated_percentage(std::span<const WordCandidate> candidates) {
  LabelScores s;
  for (const auto& c : candidates) s[c.label] += c.percentage;
  return s;
}

LabelScores weighted_percentage(std::span<const WordCandidate> candidates) {
  LabelScores s;
  for (const auto& c : candidates) s[c.label] += c.probability * c.percentage;
  return s;
}

namespace {

LabelScores divide_by(LabelScores sums, const std::map<std::string, int>& n) {
  for (auto& [label, v] : sums) v /= static_cast<double>(n.at(label));
  return sums;
}

}  // namespace

LabelScores mean_percentage(std::span<const WordCandidate> candidates) {
  std::map<std::string, int> n;
  for (const auto& c : candidates) ++n[c.label];
  return divide_by(accumulated_percentage(candidates), n);
}

LabelScores mean_weighted_percentage(std::span<const WordCandidate> candidates) {
  std::map<std::string, int> n;
  for (const auto& c : candidates) ++n[c.label];
  return divide_by(weighted_percentage(candidates), n);
}

LabelScores accumulated_counts(std::span<const DescriptiveWord> words, const LexiconDb& db) {
  LabelScores s;
  for (const auto& w : words) {
    auto d = db.distribution(w.word);
    if (!d) continue;
    for (const auto& e : d->entries) s[e.label] += static_cast<double>(e.count);
  }
  return s;
}

LabelScores summed_distribution_percentage(std::span<const DescriptiveWord> words, const LexiconDb& db) {
  LabelScores s;
  for (const auto& w : words) {
    auto d = db.distribution(w.word);
    if (!d) continue;
    for (const auto& e : d->entries) s[e.label] += e.percentage;
  }
  return s;
}

LabelScores mean_distribution_percentage(std::span<const DescriptiveWord> words, const LexiconDb& db) {
  LabelScores s;
  std::map<std::string, int> n;
  for (const auto& w : words) {
    auto d = db.distribution(w.word);
    if (!d) continue;
    for (const auto& e : d->entries) {
      s[e.label] += e.percentage;
      ++n[e.label];
    }
  }
  return divide_by(std::move(s), n);
}

VoteSet agent_1_1(std::span<const DescriptiveWord> words, const LexiconDb& db) {
  return argmax_labels(candidate_appearances(build_candidates(words, db)));
}

VoteSet agent_1_2(std::span<const DescriptiveWord> words, const LexiconDb& db) {
  return argmax_labels(accumulated_percentage(build_candidates(words, db)));
}

VoteSet agent_1_3(std::span<const DescriptiveWord> words, const LexiconDb& db) {
  return argmax_labels(weighted_percentage(build_candidates(words, db)));
}

VoteSet agent_1_4(std::span<const DescriptiveWord> words, const LexiconDb& db) {
  return argmax_labels(accumulated_counts(words, db));
}

VoteSet agent_1_5(std::span<const DescriptiveWord> words, const LexiconDb& db) {
  return argmax_labels(summed_distribution_percentage(words, db));
}

VoteSet agent_1_6(std::span<const DescriptiveWord> words, const LexiconDb& db) {
  return argmax_labels(mean_percentage(build_candidates(words, db)));
}

VoteSet agent_1_7(std::span<const DescriptiveWord> words, const LexiconDb& db) {
  return argmax_labels(mean_weighted_percentage(build_candidates(words, db)));
}

VoteSet agent_1_8(std::span<const DescriptiveWord> words, const LexiconDb& db) {
  return argmax_labels(mean_distribution_percentage(words, db));
}

VoteSet agent_2_x(std::span<const DescriptiveWord> words, const LexiconDb& db, std::size_t n, Rng& rng) {
  if (n == 0) throw std::invalid_argument("sample size must be positive");
  LabelScores wins;
  for (const auto& w : words) {
    auto sample = db.sample_pairs(w.word, n, rng);
    if (sample.empty()) continue;
    LabelScores freq;
    for (const auto& label : sample) freq[label] += 1.0;
    for (const auto& label : argmax_labels(freq)) wins[label] += 1.0;
  }
  return argmax_labels(wins);
}

VoteSet cast_vote(AgentId id, std::span<const DescriptiveWord> words, const LexiconDb& db, Seed seed) {
  switch (id) {
    case AgentId::a1_1: return agent_1_1(words, db);
    case AgentId::a1_2: return agent_1_2(words, db);
    case AgentId::a1_3: return agent_1_3(words, db);
    case AgentId::a1_4: return agent_1_4(words, db);
    case AgentId::a1_5: return agent_1_5(words, db);
    case AgentId::a1_6: return agent_1_6(words, db);
    case AgentId::a1_7: return agent_1_7(words, db);
    case AgentId::a1_8: return agent_1_8(words, db);
    default: break;
  }
  Rng rng(derive(seed, std::string("agent/") + std::string(agent_name(id))));
  return agent_2_x(words, db, sample_size(id), rng);
}

std::vector<VoteTally> tally_votes(std::span<const AgentVote> votes) {
  std::map<std::string, VoteTally> by_label;
  for (const auto& av : votes) {
    for (const auto& label : av.labels) {
      auto& t = by_label[label];
      t.label = label;
      ++t.votes;
      if (is_deterministic(av.agent)) ++t.deterministic_votes;
      t.voters.push_back(av.agent);
    }
  }
  std::vector<VoteTally> out;
  out.reserve(by_label.size());
  for (auto& [_, t] : by_label) out.push_back(std::move(t));
  std::sort(out.begin(), out.end(), [](const VoteTally& a, const VoteTally& b) {
    if (a.votes != b.votes) return a.votes > b.votes;
    if (a.deterministic_votes != b.deterministic_votes) return a.deterministic_votes > b.deterministic_votes;
    return a.label < b.label;
  });
  return out;
}

std::vector<std::string> LabelRanking::labels() const {
  std::vector<std::string> out;
  out.reserve(tallies.size());
  for (const auto& t : tallies) out.push_back(t.label);
  return out;
}

LabelRanking classify(std::span<const DescriptiveWord> words, const LexiconDb& db, Seed seed) {
  LabelRanking ranking;
  ranking.seed = seed;
  ranking.agents.reserve(kAllAgents.size());
  for (auto id : kAllAgents) ranking.agents.push_back({id, cast_vote(id, words, db, seed)});
  ranking.tallies = tally_votes(ranking.agents);
  return ranking;
}

}  // namespace grounding
