#include "grounding/label_set.hpp"

#include <fstream>
#include <limits>
#include <stdexcept>

#include "grounding/error.hpp"
#include "grounding/text.hpp"

namespace grounding {

namespace {

// Keep in sync with data/labels.txt.
constexpr std::string_view kDefaultLabels[] = {
    "add",
    "airplane",
    "alarm",
    "arrow_down",
    "arrow_left",
    "arrow_right",
    "arrow_up",
    "attach",
    "bag",
    "barcode",
    "battery",
    "bluetooth",
    "bookmark",
    "brightness",
    "calculator",
    "calendar",
    "call",
    "camera",
    "cart",
    "chat",
    "check_mark",
    "clock",
    "close",
    "cloud",
    "compass",
    "contacts",
    "copy",
    "credit_card",
    "crop",
    "delete",
    "dollar",
    "download",
    "edit",
    "emoji",
    "expand",
    "eye",
    "favorite",
    "file",
    "filter",
    "flag",
    "flash",
    "folder",
    "gift",
    "globe",
    "grid",
    "headphones",
    "help",
    "history",
    "house",
    "info",
    "key",
    "link",
    "location",
    "lock",
    "mail",
    "menu",
    "microphone",
    "minus",
    "more",
    "music",
    "notifications",
    "pause",
    "play",
    "power",
    "printer",
    "refresh",
    "search",
    "send",
    "settings",
    "share",
    "shield",
    "shuffle",
    "star",
    "sync",
    "tag",
    "upload",
    "user",
    "video",
    "volume",
    "negative",
};

}  // namespace

LabelSet::LabelSet(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.size() > std::numeric_limits<LabelId>::max()) {
    throw Error("label set too large");
  }
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i].empty()) throw Error("label set contains an empty name");
    auto [it, inserted] = index_.emplace(names_[i], static_cast<LabelId>(i));
    if (!inserted) throw Error("duplicate label in label set: " + names_[i]);
  }
}

const LabelSet& LabelSet::defaults() {
  static const LabelSet set = [] {
    std::vector<std::string> names;
    for (auto n : kDefaultLabels) names.emplace_back(n);
    return LabelSet(std::move(names));
  }();
  return set;
}

LabelSet LabelSet::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read label file " + path.string());
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    auto name = trim(line);
    if (name.empty() || name.front() == '#') continue;
    names.emplace_back(name);
  }
  return LabelSet(std::move(names));
}

std::optional<LabelId> LabelSet::id_of(std::string_view name) const {
  // Heterogeneous lookup needs C++20 transparent hashing; a temporary is fine
  // at the sizes involved.
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

}  // namespace grounding
