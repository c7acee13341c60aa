#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "grounding/intent_prediction.hpp"
#include "grounding/lexicon_db.hpp"
#include "grounding/rng.hpp"

namespace grounding {

/// The thirteen voting agents.  Agents 1.x are deterministic functions of the
/// words and the lexicon; agents 2.x vote from random pair samples.
enum class AgentId : std::uint8_t {
  a1_1, a1_2, a1_3, a1_4, a1_5, a1_6, a1_7, a1_8,
  a2_1, a2_2, a2_3, a2_4, a2_5,
};

inline constexpr std::array<AgentId, 13> kAllAgents = {
    AgentId::a1_1, AgentId::a1_2, AgentId::a1_3, AgentId::a1_4, AgentId::a1_5,
    AgentId::a1_6, AgentId::a1_7, AgentId::a1_8, AgentId::a2_1, AgentId::a2_2,
    AgentId::a2_3, AgentId::a2_4, AgentId::a2_5,
};

/// "1.1" ... "2.5"
std::string_view agent_name(AgentId id);
constexpr bool is_deterministic(AgentId id) { return id <= AgentId::a1_8; }
/// Pair sample size of a random agent (10, 20, 50, 100, 200); 0 for 1.x.
std::size_t sample_size(AgentId id);

/// A descriptive word joined with its most frequent lexicon label.
struct WordCandidate {
  std::string word;
  double probability = 0.0;
  std::string label;
  double percentage = 0.0;
};

/// Labels an agent votes for, sorted by name.  Empty means the agent abstains.
using VoteSet = std::vector<std::string>;
/// Per-label score computed by one agent rule.
using LabelScores = std::map<std::string, double>;

/// Scores within this absolute distance of the maximum count as co-maximal.
inline constexpr double kTieTolerance = 1e-12;

VoteSet argmax_labels(const LabelScores& scores);

/// One candidate per word present in the db; absent words are skipped.
std::vector<WordCandidate> build_candidates(std::span<const DescriptiveWord> words, const LexiconDb& db);

// Candidate-level rules (agents 1.1, 1.2, 1.3, 1.6, 1.7).
LabelScores candidate_appearances(std::span<const WordCandidate> candidates);
LabelScores accumulated_percentage(std::span<const WordCandidate> candidates);
LabelScores weighted_percentage(std::span<const WordCandidate> candidates);
LabelScores mean_percentage(std::span<const WordCandidate> candidates);
LabelScores mean_weighted_percentage(std::span<const WordCandidate> candidates);

// Full-distribution rules (agents 1.4, 1.5, 1.8).
LabelScores accumulated_counts(std::span<const DescriptiveWord> words, const LexiconDb& db);
LabelScores summed_distribution_percentage(std::span<const DescriptiveWord> words, const LexiconDb& db);
LabelScores mean_distribution_percentage(std::span<const DescriptiveWord> words, const LexiconDb& db);

VoteSet agent_1_1(std::span<const DescriptiveWord> words, const LexiconDb& db);
VoteSet agent_1_2(std::span<const DescriptiveWord> words, const LexiconDb& db);
VoteSet agent_1_3(std::span<const DescriptiveWord> words, const LexiconDb& db);
VoteSet agent_1_4(std::span<const DescriptiveWord> words, const LexiconDb& db);
VoteSet agent_1_5(std::span<const DescriptiveWord> words, const LexiconDb& db);
VoteSet agent_1_6(std::span<const DescriptiveWord> words, const LexiconDb& db);
VoteSet agent_1_7(std::span<const DescriptiveWord> words, const LexiconDb& db);
VoteSet agent_1_8(std::span<const DescriptiveWord> words, const LexiconDb& db);

/// Random agent: per word, the modal label(s) of `n` sampled pairs; then the
/// label(s) winning the most words.
VoteSet agent_2_x(std::span<const DescriptiveWord> words, const LexiconDb& db, std::size_t n, Rng& rng);

/// Runs a single agent.  Random agents draw from a stream derived from `seed`
/// and the agent id, so the result does not depend on which other agents run.
VoteSet cast_vote(AgentId id, std::span<const DescriptiveWord> words, const LexiconDb& db, Seed seed);

struct VoteTally {
  std::string label;
  int votes = 0;
  int deterministic_votes = 0;
  std::vector<AgentId> voters;  // in agent order
};

struct AgentVote {
  AgentId agent;
  VoteSet labels;
};

/// Voted labels ordered by votes desc, deterministic votes desc, label asc.
struct LabelRanking {
  std::vector<VoteTally> tallies;
  std::vector<AgentVote> agents;  // all 13, in agent order
  Seed seed;

  bool empty() const { return tallies.empty(); }
  std::vector<std::string> labels() const;
};

LabelRanking classify(std::span<const DescriptiveWord> words, const LexiconDb& db, Seed seed);

/// Ranks a set of agent votes; exposed so callers can re-rank a subset.
std::vector<VoteTally> tally_votes(std::span<const AgentVote> votes);

}  // namespace grounding
