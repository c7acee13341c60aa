#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "grounding/label_set.hpp"
#include "grounding/rng.hpp"

namespace grounding {

/// One input row of the pair corpus before validation.
struct PairRecord {
  std::string word;
  std::string label;
  std::uint64_t count = 1;
};

struct RejectedRecord {
  std::size_t line = 0;  // 1-based source line, or record index for in-memory input
  std::string word;
  std::string label;
  std::string reason;
};

struct IngestReport {
  std::size_t accepted = 0;
  std::vector<RejectedRecord> rejected;
};

struct LabelCount {
  std::string label;
  std::uint64_t count = 0;
  double percentage = 0.0;  // count / total_pairs

  friend bool operator==(const LabelCount&, const LabelCount&) = default;
};

/// Per-word label distribution, sorted by count descending then label name.
struct LabelDistribution {
  std::string word;
  std::vector<LabelCount> entries;
  std::uint64_t total_pairs = 0;

  friend bool operator==(const LabelDistribution&, const LabelDistribution&) = default;
};

struct TopLabel {
  std::string label;
  double percentage = 0.0;
  std::uint64_t count = 0;
};

struct LexiconMetadata {
  std::string source;
  std::uint64_t pair_total = 0;
  std::uint64_t word_total = 0;
};

/// Immutable inverted index from descriptive word to per-label pair counts,
/// built once from a word-label pair corpus.  Safe to share across threads.
class LexiconDb {
 public:
  /// Tab-separated `word<TAB>label[<TAB>count]`, `#` comments ignored.
  static LexiconDb ingest(std::istream& in, const LabelSet& labels, IngestReport* report = nullptr,
                          std::string source = "<stream>");
  static LexiconDb ingest_file(const std::filesystem::path& path, const LabelSet& labels,
                               IngestReport* report = nullptr);
  static LexiconDb ingest(std::span<const PairRecord> records, const LabelSet& labels,
                          IngestReport* report = nullptr, std::string source = "<memory>");

  /// Loads either a binary snapshot (detected by its magic header) or a pair file.
  static LexiconDb open(const std::filesystem::path& path, const LabelSet& labels,
                        IngestReport* report = nullptr);

  void save_snapshot(std::ostream& out) const;
  void save_snapshot(const std::filesystem::path& path) const;
  static LexiconDb load_snapshot(std::istream& in, std::string source = "<snapshot>");
  static bool is_snapshot(const std::filesystem::path& path);

  std::optional<LabelDistribution> distribution(std::string_view word) const;
  std::optional<TopLabel> top_label(std::string_view word) const;

  /// Draws up to `n` pairs containing `word` uniformly without replacement and
  /// returns their labels in draw order.  Absent words yield an empty list.
  std::vector<std::string> sample_pairs(std::string_view word, std::size_t n, Rng& rng) const;

  std::uint64_t pair_count(std::string_view word) const;
  bool contains(std::string_view word) const { return find(word) != nullptr; }

  /// Labels ordered by total pair count across the corpus (desc, name asc).
  std::vector<LabelCount> top_labels(std::size_t k) const;
  /// All indexed words in lexicographic order.
  std::vector<std::string> words() const;

  const LexiconMetadata& metadata() const { return metadata_; }
  const LabelSet& label_set() const { return labels_; }

 private:
  struct Entry {
    LabelId label;
    std::uint64_t count;
  };
  struct WordEntry {
    std::vector<Entry> entries;  // count desc, label name asc
    std::uint64_t total = 0;
  };

  LexiconDb() = default;
  const WordEntry* find(std::string_view word) const;
  static LexiconDb build(std::unordered_map<std::string, std::unordered_map<LabelId, std::uint64_t>> counts,
                         const LabelSet& labels, std::string source);

  LabelSet labels_;
  std::unordered_map<std::string, WordEntry> index_;
  LexiconMetadata metadata_;
};

}  // namespace grounding
