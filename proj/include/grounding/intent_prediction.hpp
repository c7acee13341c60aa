#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace grounding {

enum class IntentSource { typed, transcribed };

/// A trimmed, non-empty natural-language user intent.
class Intent {
 public:
  explicit Intent(std::string_view text, IntentSource source = IntentSource::typed);

  const std::string& text() const { return text_; }
  IntentSource source() const { return source_; }

 private:
  std::string text_;
  IntentSource source_;
};

/// A word predicted for the masked slot, with its raw model probability.
struct DescriptiveWord {
  int rank = 0;  // 1-based
  std::string word;
  double probability = 0.0;

  friend bool operator==(const DescriptiveWord&, const DescriptiveWord&) = default;
};

inline constexpr std::string_view kMaskToken = "[MASK]";
inline constexpr std::string_view kDefaultTemplateSuffix = ", so the [MASK] icon should be clicked.";

struct PredictorConfig {
  std::size_t k = 5;
  std::string template_suffix{kDefaultTemplateSuffix};
  std::optional<std::string> endpoint;               // remote fill-mask server URL
  std::optional<std::filesystem::path> fixture_path;  // wins over endpoint when both are set
  std::chrono::milliseconds timeout{5000};
};

/// Appends the template suffix to the intent after stripping trailing `.!?`.
/// Throws InvalidIntentError if the intent already contains a mask token.
std::string build_prompt(const Intent& intent, const PredictorConfig& cfg = {});

/// Raw (word, probability) pair as returned by a provider, before cleanup.
struct WordScore {
  std::string word;
  double probability = 0.0;
};

/// Source of fill-mask predictions.  Implementations must be safe to call from
/// multiple threads.
class WordPredictor {
 public:
  virtual ~WordPredictor() = default;
  virtual std::vector<WordScore> query(const std::string& prompt, std::size_t k) const = 0;
  virtual std::string describe() const = 0;
};

/// Fixture file: JSON object mapping prompt -> [[word, probability], ...].
class FixturePredictor final : public WordPredictor {
 public:
  explicit FixturePredictor(const std::filesystem::path& path);
  explicit FixturePredictor(std::map<std::string, std::vector<WordScore>> table, std::string name = "<fixture>");

  std::vector<WordScore> query(const std::string& prompt, std::size_t k) const override;
  std::string describe() const override { return "fixture:" + name_; }

 private:
  std::map<std::string, std::vector<WordScore>> table_;
  std::string name_;
};

/// POSTs {"prompt", "k"} to the endpoint and expects [{"word", "probability"}].
class RemotePredictor final : public WordPredictor {
 public:
  explicit RemotePredictor(std::string url, std::chrono::milliseconds timeout = std::chrono::seconds(5));

  std::vector<WordScore> query(const std::string& prompt, std::size_t k) const override;
  std::string describe() const override { return "remote:" + url_; }

 private:
  std::string url_;
  std::string host_;  // scheme://host:port
  std::string path_;
  std::chrono::milliseconds timeout_;
};

std::unique_ptr<WordPredictor> make_predictor(const PredictorConfig& cfg);

/// Parses a CLI predictor spec: `fixture:<path>` or `remote:<url>`.
void apply_predictor_spec(std::string_view spec, PredictorConfig& cfg);

/// Queries the provider and normalises the result: lowercase, duplicates
/// collapsed to their maximum probability, sorted by probability descending,
/// truncated to cfg.k and re-ranked 1..n.
std::vector<DescriptiveWord> predict_words(const std::string& prompt, const PredictorConfig& cfg,
                                           const WordPredictor& predictor);

/// The normalisation step of predict_words, exposed for providers and tests.
std::vector<DescriptiveWord> normalize_predictions(std::vector<WordScore> raw, std::size_t k,
                                                   const std::string& provider);

}  // namespace grounding
