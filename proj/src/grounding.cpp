#include "grounding/grounding.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include "grounding/error.hpp"
#include "grounding/stemmer.hpp"
#include "grounding/text.hpp"

namespace grounding {

using nlohmann::json;

namespace {

// Keep in sync with data/stopwords.txt.
constexpr std::string_view kDefaultStopwords[] = {
    "a",    "about", "am",    "an",     "and",  "are",   "as",   "at",    "be",    "been", "but",  "by",
    "can",  "could", "d",     "did",    "do",   "does",  "for",  "from",  "had",   "has",  "have", "he",
    "her",  "him",   "his",   "i",      "if",   "in",    "into", "is",    "it",    "its",  "ll",   "m",
    "me",   "my",    "myself", "of",    "on",   "or",    "our",  "re",    "s",     "she",  "should", "so",
    "t",    "that",  "the",   "their",  "them", "then",  "there", "they", "this",  "to",   "ve",   "was",
    "we",   "were",  "will",  "with",   "would", "you",  "your",
};

}  // namespace

const StopwordSet& StopwordSet::defaults() {
  static const StopwordSet set = [] {
    std::set<std::string> words;
    for (auto w : kDefaultStopwords) words.emplace(w);
    return StopwordSet(std::move(words));
  }();
  return set;
}

StopwordSet StopwordSet::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read stopword file " + path.string());
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    auto w = normalize_word(line);
    if (w.empty() || w.front() == '#') continue;
    words.insert(std::move(w));
  }
  return StopwordSet(std::move(words));
}

bool TokenSet::contains(const std::string& stem) const {
  return std::any_of(tokens.begin(), tokens.end(), [&](const Token& t) { return t.stem == stem; });
}

std::vector<std::string> TokenSet::stems() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.stem);
  return out;
}

std::optional<VisualMatch> search_visual(std::span<const std::string> ranked_labels, const Screen& screen) {
  for (const auto& label : ranked_labels) {
    if (label == kNegativeLabel) continue;
    std::vector<const GraphicElement*> hits;
    for (const auto& g : screen.graphics) {
      if (g.label == label) hits.push_back(&g);
    }
    if (hits.empty()) continue;
    std::stable_sort(hits.begin(), hits.end(), [](const GraphicElement* a, const GraphicElement* b) {
      if (a->confidence != b->confidence) return a->confidence > b->confidence;
      return reads_before(a->bbox, b->bbox);
    });
    VisualMatch match{label, {}};
    for (const auto* g : hits) match.targets.push_back({g->id, g->bbox, g->confidence});
    return match;
  }
  return std::nullopt;
}

std::optional<VisualMatch> search_visual(const LabelRanking& ranking, const Screen& screen) {
  auto labels = ranking.labels();
  return search_visual(std::span<const std::string>(labels), screen);
}

TokenSet build_tokens(const Intent& intent, std::span<const DescriptiveWord> words,
                      std::span<const std::string> ranked_labels, const StopwordSet& stopwords) {
  TokenSet set;
  std::unordered_set<std::string> seen;
  auto add = [&](std::string_view text, TokenSource source) {
    for (auto& raw : tokenize(text)) {
      if (stopwords.contains(raw)) continue;
      auto stem = porter_stem(raw);
      if (seen.insert(stem).second) set.tokens.push_back({std::move(stem), source});
    }
  };
  add(intent.text(), TokenSource::intent);
  for (const auto& w : words) add(w.word, TokenSource::predicted_word);
  for (const auto& label : ranked_labels) {
    if (label != kNegativeLabel) add(label, TokenSource::voted_label);
  }
  return set;
}

std::optional<std::vector<Target>> search_textual(const TokenSet& tokens, const Screen& screen) {
  if (tokens.empty()) return std::nullopt;
  struct Scored {
    const TextElement* text;
    int count;
  };
  std::vector<Scored> scored;
  for (const auto& t : screen.texts) {
    std::unordered_set<std::string> stems;
    for (const auto& raw : tokenize(t.content)) stems.insert(porter_stem(raw));
    int count = 0;
    for (const auto& tok : tokens.tokens) count += stems.contains(tok.stem) ? 1 : 0;
    if (count > 0) scored.push_back({&t, count});
  }
  if (scored.empty()) return std::nullopt;
  std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.count != b.count) return a.count > b.count;
    return reads_before(a.text->bbox, b.text->bbox);
  });
  std::vector<Target> out;
  out.reserve(scored.size());
  for (const auto& s : scored) out.push_back({s.text->id, s.text->bbox, static_cast<double>(s.count)});
  return out;
}

GroundingResult ground_with_words(const Intent& intent, std::vector<DescriptiveWord> words, const Screen& screen,
                                  const LexiconDb& db, const GroundingConfig& cfg, Seed seed) {
  GroundingResult result;
  result.seed = seed;
  result.words = std::move(words);
  result.ranking = classify(result.words, db, seed);
  auto labels = result.ranking.labels();
  result.tokens = build_tokens(intent, result.words, labels, cfg.stopwords);

  if (cfg.mode != SearchMode::text_only) {
    if (auto match = search_visual(std::span<const std::string>(labels), screen)) {
      result.path = ResolutionPath::visual;
      result.matched_label = match->label;
      result.targets = std::move(match->targets);
      return result;
    }
  }
  if (cfg.mode != SearchMode::cv_only) {
    if (auto hits = search_textual(result.tokens, screen)) {
      result.path = ResolutionPath::textual;
      for (const auto& t : *hits) result.token_counts[t.element_id] = static_cast<int>(t.score);
      result.targets = std::move(*hits);
      return result;
    }
  }
  result.path = ResolutionPath::none;
  return result;
}

GroundingResult ground(const Intent& intent, const Screen& screen, const LexiconDb& db, const GroundingConfig& cfg,
                       const WordPredictor& predictor, Seed seed) {
  std::string prompt;
  try {
    prompt = build_prompt(intent, cfg.predictor);
  } catch (const Error& e) {
    throw StageError("prompt", e.what());
  }
  std::vector<DescriptiveWord> words;
  try {
    words = predict_words(prompt, cfg.predictor, predictor);
  } catch (const Error& e) {
    throw StageError("predict", e.what());
  } catch (const std::exception& e) {
    throw StageError("predict", e.what());
  }
  auto result = ground_with_words(intent, std::move(words), screen, db, cfg, seed);
  result.prompt = std::move(prompt);
  return result;
}

std::string_view to_string(ResolutionPath path) {
  switch (path) {
    case ResolutionPath::visual: return "visual";
    case ResolutionPath::textual: return "textual";
    case ResolutionPath::none: return "none";
  }
  return "none";
}

std::string_view to_string(TokenSource source) {
  switch (source) {
    case TokenSource::intent: return "intent";
    case TokenSource::predicted_word: return "predicted_word";
    case TokenSource::voted_label: return "voted_label";
  }
  return "intent";
}

json to_json(const LabelRanking& ranking) {
  json tallies = json::array();
  for (const auto& t : ranking.tallies) {
    json voters = json::array();
    for (auto a : t.voters) voters.push_back(agent_name(a));
    tallies.push_back({{"label", t.label},
                       {"votes", t.votes},
                       {"deterministic_votes", t.deterministic_votes},
                       {"voters", std::move(voters)}});
  }
  json agents = json::array();
  for (const auto& av : ranking.agents) {
    agents.push_back({{"agent", agent_name(av.agent)},
                      {"deterministic", is_deterministic(av.agent)},
                      {"sample_size", sample_size(av.agent)},
                      {"labels", av.labels}});
  }
  return {{"tallies", std::move(tallies)}, {"agents", std::move(agents)}, {"seed", ranking.seed.value}};
}

json to_json(const GroundingResult& r) {
  json targets = json::array();
  for (const auto& t : r.targets) {
    targets.push_back({{"id", t.element_id}, {"bbox", json::array({t.bbox.x, t.bbox.y, t.bbox.w, t.bbox.h})},
                       {"score", t.score}});
  }
  json words = json::array();
  for (const auto& w : r.words) words.push_back({{"rank", w.rank}, {"word", w.word}, {"probability", w.probability}});
  json tokens = json::array();
  for (const auto& t : r.tokens.tokens) tokens.push_back({{"token", t.stem}, {"source", to_string(t.source)}});

  json out = {{"path", to_string(r.path)}, {"targets", std::move(targets)}, {"seed", r.seed.value}};
  out["matched_label"] = r.matched_label ? json(*r.matched_label) : json(nullptr);
  out["token_counts"] = r.token_counts;
  out["diagnostics"] = {{"prompt", r.prompt},
                        {"predicted_words", std::move(words)},
                        {"label_ranking", to_json(r.ranking)},
                        {"tokens", std::move(tokens)}};
  return out;
}

}  // namespace grounding
