#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "grounding/label_set.hpp"

namespace grounding {

/// Axis-aligned pixel rectangle; top-left origin, strictly positive extents.
struct BBox {
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t w = 1;
  std::int64_t h = 1;

  /// Throws std::invalid_argument unless w > 0 and h > 0.
  static BBox make(std::int64_t x, std::int64_t y, std::int64_t w, std::int64_t h);

  std::int64_t area() const { return w * h; }
  std::int64_t right() const { return x + w; }
  std::int64_t bottom() const { return y + h; }

  friend bool operator==(const BBox&, const BBox&) = default;
};

std::int64_t intersection_area(const BBox& a, const BBox& b);
BBox bbox_union(const BBox& a, const BBox& b);

struct GraphicElement {
  std::string id;
  BBox bbox;
  std::string label;  // empty only for unlabeled detector output
  double confidence = 1.0;

  friend bool operator==(const GraphicElement&, const GraphicElement&) = default;
};

struct TextElement {
  std::string id;
  BBox bbox;
  std::string content;

  friend bool operator==(const TextElement&, const TextElement&) = default;
};

/// Element ids of a composite (e.g. icon + caption) button.
struct ButtonGroup {
  std::string id;
  std::vector<std::string> members;

  friend bool operator==(const ButtonGroup&, const ButtonGroup&) = default;
};

struct Screen {
  std::string id;
  std::int64_t width = 0;
  std::int64_t height = 0;
  std::optional<std::string> image;
  std::vector<GraphicElement> graphics;
  std::vector<TextElement> texts;
  std::vector<ButtonGroup> button_groups;

  std::size_t element_count() const { return graphics.size() + texts.size(); }
  /// Bounding box of any element id, graphic or text.
  std::optional<BBox> bbox_of(const std::string& element_id) const;
  /// Every element box; graphics first, then texts, each in source order.
  std::vector<BBox> element_boxes() const;

  friend bool operator==(const Screen&, const Screen&) = default;
};

/// Reading order: top-left y, then x.  Returns true if `a` reads before `b`.
inline bool reads_before(const BBox& a, const BBox& b) {
  return a.y != b.y ? a.y < b.y : a.x < b.x;
}

struct ScreenWarning {
  std::string path;
  std::string message;
};

struct LoadOptions {
  /// Accept graphics without a label (detector output awaiting a labeler).
  bool allow_unlabeled = false;
};

/// Parses and validates an annotation document.  Boxes that overflow the
/// screen are clamped and reported in `warnings`.
Screen load_screen(const nlohmann::json& doc, const LabelSet& labels, std::vector<ScreenWarning>* warnings = nullptr,
                   LoadOptions options = {});
Screen load_screen_file(const std::filesystem::path& path, const LabelSet& labels,
                        std::vector<ScreenWarning>* warnings = nullptr);
nlohmann::json save_screen(const Screen& screen);

/// Screens of a directory (`*.json`), indexed by their `id` field.
class ScreenStore {
 public:
  ScreenStore() = default;
  static ScreenStore load_directory(const std::filesystem::path& dir, const LabelSet& labels);

  void add(Screen screen);
  const Screen* find(const std::string& id) const;
  std::vector<std::string> ids() const;
  std::size_t size() const { return screens_.size(); }

 private:
  std::map<std::string, Screen> screens_;
};

// ----- external providers ---------------------------------------------------

/// Element detector (e.g. a UIED service).  Returns an annotation document
/// whose graphics may lack labels.
class ElementDetector {
 public:
  virtual ~ElementDetector() = default;
  virtual nlohmann::json detect(const std::string& image_ref) const = 0;
  virtual std::string describe() const = 0;
};

struct IconLabel {
  std::string label;
  std::optional<double> confidence;
};

/// Icon classifier assigning a local label to each graphic element.
class IconLabeler {
 public:
  virtual ~IconLabeler() = default;
  virtual std::map<std::string, IconLabel> label(const Screen& screen) const = 0;
  virtual std::string describe() const = 0;
};

/// Replays recorded detector output: JSON object image_ref -> document.
class FixtureDetector final : public ElementDetector {
 public:
  explicit FixtureDetector(const std::filesystem::path& path);
  explicit FixtureDetector(nlohmann::json recordings, std::string name = "<fixture>");
  nlohmann::json detect(const std::string& image_ref) const override;
  std::string describe() const override { return "fixture:" + name_; }

 private:
  nlohmann::json recordings_;
  std::string name_;
};

/// POSTs {"image", "settings"} and expects an annotation document back.
class RemoteDetector final : public ElementDetector {
 public:
  RemoteDetector(std::string url, nlohmann::json settings = nlohmann::json::object());
  nlohmann::json detect(const std::string& image_ref) const override;
  std::string describe() const override { return "remote:" + url_; }

 private:
  std::string url_;
  nlohmann::json settings_;
};

/// Replays recorded labels: JSON object element id -> label or {label, confidence}.
class FixtureLabeler final : public IconLabeler {
 public:
  explicit FixtureLabeler(const std::filesystem::path& path);
  explicit FixtureLabeler(std::map<std::string, IconLabel> labels, std::string name = "<fixture>");
  std::map<std::string, IconLabel> label(const Screen& screen) const override;
  std::string describe() const override { return "fixture:" + name_; }

 private:
  std::map<std::string, IconLabel> labels_;
  std::string name_;
};

/// POSTs {"screen_id", "image", "graphics": [{id, bbox}]} and expects
/// {"graphics": [{id, label, confidence?}]}.
class RemoteLabeler final : public IconLabeler {
 public:
  explicit RemoteLabeler(std::string url);
  std::map<std::string, IconLabel> label(const Screen& screen) const override;
  std::string describe() const override { return "remote:" + url_; }

 private:
  std::string url_;
};

/// Runs the detector, then the labeler when any graphic lacks a label.
Screen detect_elements(const std::string& image_ref, const ElementDetector& detector, const IconLabeler* labeler,
                       const LabelSet& labels, std::vector<ScreenWarning>* warnings = nullptr);

/// Applies labeler output.  Throws ProviderError if any graphic is still
/// unlabeled afterwards or a returned label is outside the label set.
Screen label_graphics(Screen screen, const IconLabeler& labeler, const LabelSet& labels);

/// POST helper shared by remote providers: returns the parsed JSON reply.
nlohmann::json post_json(const std::string& url, const nlohmann::json& body, int timeout_seconds = 10);

}  // namespace grounding
