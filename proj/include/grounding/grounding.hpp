#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "grounding/intent_prediction.hpp"
#include "grounding/lexicon_db.hpp"
#include "grounding/rng.hpp"
#include "grounding/screen.hpp"
#include "grounding/voting.hpp"

namespace grounding {

class StopwordSet {
 public:
  StopwordSet() = default;
  explicit StopwordSet(std::set<std::string> words) : words_(std::move(words)) {}

  /// The built-in list (mirrors data/stopwords.txt).
  static const StopwordSet& defaults();
  static StopwordSet from_file(const std::filesystem::path& path);

  bool contains(const std::string& word) const { return words_.contains(word); }
  std::size_t size() const { return words_.size(); }

 private:
  std::set<std::string> words_;
};

enum class TokenSource { intent, predicted_word, voted_label };

struct Token {
  std::string stem;
  TokenSource source;
};

/// Distinct search stems in first-seen order, each tagged with the source it
/// first came from.
struct TokenSet {
  std::vector<Token> tokens;

  bool empty() const { return tokens.empty(); }
  std::size_t size() const { return tokens.size(); }
  bool contains(const std::string& stem) const;
  std::vector<std::string> stems() const;
};

enum class ResolutionPath { visual, textual, none };

struct Target {
  std::string element_id;
  BBox bbox;
  double score = 0.0;  // confidence (visual) or distinct token count (textual)
};

struct VisualMatch {
  std::string label;
  std::vector<Target> targets;
};

/// Walks the ranking in priority order, skipping "negative", and returns every
/// non-negative graphic bearing the first label present on screen, ordered by
/// confidence desc then reading order.
std::optional<VisualMatch> search_visual(std::span<const std::string> ranked_labels, const Screen& screen);
std::optional<VisualMatch> search_visual(const LabelRanking& ranking, const Screen& screen);

/// Builds stems from the intent words, predicted words and voted labels
/// (labels split on '_').  Stopwords are checked before stemming; the
/// "negative" label contributes no tokens.
TokenSet build_tokens(const Intent& intent, std::span<const DescriptiveWord> words,
                      std::span<const std::string> ranked_labels, const StopwordSet& stopwords);

/// Text elements ranked by the number of distinct tokens their stemmed
/// content contains (desc), ties by reading order.  Zero-count elements are
/// dropped; nullopt if none remain.
std::optional<std::vector<Target>> search_textual(const TokenSet& tokens, const Screen& screen);

enum class SearchMode { full, cv_only, text_only };

struct GroundingConfig {
  PredictorConfig predictor;
  StopwordSet stopwords = StopwordSet::defaults();
  SearchMode mode = SearchMode::full;
};

struct GroundingResult {
  ResolutionPath path = ResolutionPath::none;
  std::vector<Target> targets;
  std::optional<std::string> matched_label;
  std::map<std::string, int> token_counts;  // textual path only

  // diagnostics
  std::string prompt;
  std::vector<DescriptiveWord> words;
  LabelRanking ranking;
  TokenSet tokens;
  Seed seed;
};

/// predict -> classify -> visual search -> textual fallback.  Provider
/// failures are rethrown as StageError naming the stage.
GroundingResult ground(const Intent& intent, const Screen& screen, const LexiconDb& db,
                       const GroundingConfig& cfg, const WordPredictor& predictor, Seed seed);

/// Same pipeline from already-predicted words (skips the predictor).
GroundingResult ground_with_words(const Intent& intent, std::vector<DescriptiveWord> words, const Screen& screen,
                                  const LexiconDb& db, const GroundingConfig& cfg, Seed seed);

std::string_view to_string(ResolutionPath path);
std::string_view to_string(TokenSource source);

nlohmann::json to_json(const LabelRanking& ranking);
nlohmann::json to_json(const GroundingResult& result);

}  // namespace grounding
