#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace grounding {

/// Label reserved for non-clickable imagery.  It may appear in the lexicon and
/// on screens but is never a visual target.
inline constexpr std::string_view kNegativeLabel = "negative";

using LabelId = std::uint16_t;

/// Ordered set of local label names shared by the icon classifier and the
/// lexicon.  The default set has 80 names: 79 icon classes plus "negative".
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(std::vector<std::string> names);

  static const LabelSet& defaults();
  /// One label per line; blank lines and `#` comments are skipped.
  static LabelSet from_file(const std::filesystem::path& path);

  bool contains(std::string_view name) const { return id_of(name).has_value(); }
  std::optional<LabelId> id_of(std::string_view name) const;
  const std::string& name(LabelId id) const { return names_.at(id); }
  std::span<const std::string> names() const { return names_; }
  std::size_t size() const { return names_.size(); }

  friend bool operator==(const LabelSet& a, const LabelSet& b) { return a.names_ == b.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, LabelId> index_;
};

}  // namespace grounding
