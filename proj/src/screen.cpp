#include "grounding/screen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include <httplib.h>

#include "grounding/error.hpp"
#include "grounding/text.hpp"

namespace grounding {

using nlohmann::json;

BBox BBox::make(std::int64_t x, std::int64_t y, std::int64_t w, std::int64_t h) {
  if (w <= 0 || h <= 0) throw std::invalid_argument("bbox extents must be positive");
  return BBox{x, y, w, h};
}

std::int64_t intersection_area(const BBox& a, const BBox& b) {
  auto w = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  auto h = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  return (w > 0 && h > 0) ? w * h : 0;
}

BBox bbox_union(const BBox& a, const BBox& b) {
  auto x = std::min(a.x, b.x);
  auto y = std::min(a.y, b.y);
  return BBox{x, y, std::max(a.right(), b.right()) - x, std::max(a.bottom(), b.bottom()) - y};
}

std::optional<BBox> Screen::bbox_of(const std::string& element_id) const {
  for (const auto& g : graphics) {
    if (g.id == element_id) return g.bbox;
  }
  for (const auto& t : texts) {
    if (t.id == element_id) return t.bbox;
  }
  return std::nullopt;
}

std::vector<BBox> Screen::element_boxes() const {
  std::vector<BBox> out;
  out.reserve(element_count());
  for (const auto& g : graphics) out.push_back(g.bbox);
  for (const auto& t : texts) out.push_back(t.bbox);
  return out;
}

// ----- parsing ---------------------------------------------------------------

namespace {

const json& require(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ScreenParseError(path + "." + key, "missing required field");
  return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& path) {
  const auto& v = require(obj, key, path);
  if (!v.is_string()) throw ScreenParseError(path + "." + key, "expected string");
  return v.get<std::string>();
}

std::int64_t as_pixel(const json& v, const std::string& path) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    double d = v.get<double>();
    if (std::isfinite(d) && d == std::floor(d)) return static_cast<std::int64_t>(d);
  }
  throw ScreenParseError(path, "expected integer pixel value");
}

class Parser {
 public:
  Parser(const LabelSet& labels, std::vector<ScreenWarning>* warnings, LoadOptions options)
      : labels_(labels), warnings_(warnings), options_(options) {}

  Screen parse(const json& doc) {
    if (!doc.is_object()) throw ScreenParseError("$", "expected object");
    Screen s;
    s.id = require_string(doc, "id", "$");
    if (s.id.empty()) throw ScreenParseError("$.id", "must not be empty");
    s.width = as_pixel(require(doc, "width", "$"), "$.width");
    s.height = as_pixel(require(doc, "height", "$"), "$.height");
    if (s.width <= 0 || s.height <= 0) throw ScreenParseError("$.width", "screen dimensions must be positive");
    if (auto it = doc.find("image"); it != doc.end() && !it->is_null()) {
      if (!it->is_string()) throw ScreenParseError("$.image", "expected string");
      s.image = it->get<std::string>();
    }
    width_ = s.width;
    height_ = s.height;

    if (auto it = doc.find("graphics"); it != doc.end()) {
      if (!it->is_array()) throw ScreenParseError("$.graphics", "expected array");
      for (std::size_t i = 0; i < it->size(); ++i) {
        s.graphics.push_back(graphic((*it)[i], "$.graphics[" + std::to_string(i) + "]"));
      }
    }
    if (auto it = doc.find("texts"); it != doc.end()) {
      if (!it->is_array()) throw ScreenParseError("$.texts", "expected array");
      for (std::size_t i = 0; i < it->size(); ++i) {
        s.texts.push_back(text((*it)[i], "$.texts[" + std::to_string(i) + "]"));
      }
    }
    if (auto it = doc.find("button_groups"); it != doc.end()) {
      if (!it->is_array()) throw ScreenParseError("$.button_groups", "expected array");
      for (std::size_t i = 0; i < it->size(); ++i) {
        s.button_groups.push_back(group((*it)[i], "$.button_groups[" + std::to_string(i) + "]"));
      }
    }
    for (std::size_t i = 0; i < s.button_groups.size(); ++i) {
      const auto& g = s.button_groups[i];
      for (std::size_t m = 0; m < g.members.size(); ++m) {
        if (!ids_.contains(g.members[m])) {
          throw ScreenParseError("$.button_groups[" + std::to_string(i) + "].members[" + std::to_string(m) + "]",
                                 "unknown element id \"" + g.members[m] + "\"");
        }
      }
    }
    return s;
  }

 private:
  void claim_id(const std::string& id, const std::string& path) {
    if (id.empty()) throw ScreenParseError(path, "element id must not be empty");
    if (!ids_.insert(id).second) throw ScreenParseError(path, "duplicate element id \"" + id + "\"");
  }

  BBox bbox(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 4) throw ScreenParseError(path, "expected [x, y, w, h]");
    std::int64_t x = as_pixel(v[0], path + "[0]");
    std::int64_t y = as_pixel(v[1], path + "[1]");
    std::int64_t w = as_pixel(v[2], path + "[2]");
    std::int64_t h = as_pixel(v[3], path + "[3]");
    if (w <= 0 || h <= 0) throw ScreenParseError(path, "bbox extents must be positive");
    std::int64_t x0 = std::max<std::int64_t>(x, 0);
    std::int64_t y0 = std::max<std::int64_t>(y, 0);
    std::int64_t x1 = std::min(x + w, width_);
    std::int64_t y1 = std::min(y + h, height_);
    if (x1 <= x0 || y1 <= y0) throw ScreenParseError(path, "bbox lies outside the screen");
    BBox clamped{x0, y0, x1 - x0, y1 - y0};
    if (!(clamped == BBox{x, y, w, h}) && warnings_) {
      warnings_->push_back({path, "clamped [" + std::to_string(x) + "," + std::to_string(y) + "," +
                                      std::to_string(w) + "," + std::to_string(h) + "] to screen bounds"});
    }
    return clamped;
  }

  GraphicElement graphic(const json& v, const std::string& path) {
    if (!v.is_object()) throw ScreenParseError(path, "expected object");
    GraphicElement g;
    g.id = require_string(v, "id", path);
    claim_id(g.id, path + ".id");
    g.bbox = bbox(require(v, "bbox", path), path + ".bbox");
    auto it = v.find("label");
    if (it == v.end() || it->is_null()) {
      if (!options_.allow_unlabeled) throw ScreenParseError(path + ".label", "missing required field");
    } else {
      if (!it->is_string()) throw ScreenParseError(path + ".label", "expected string");
      g.label = std::string(trim(it->get<std::string>()));
      if (!labels_.contains(g.label)) {
        throw ScreenParseError(path + ".label", "unknown label \"" + g.label + "\"");
      }
    }
    if (auto c = v.find("confidence"); c != v.end() && !c->is_null()) {
      if (!c->is_number()) throw ScreenParseError(path + ".confidence", "expected number");
      g.confidence = c->get<double>();
      if (!(g.confidence >= 0.0 && g.confidence <= 1.0)) {
        throw ScreenParseError(path + ".confidence", "must lie in [0, 1]");
      }
    }
    return g;
  }

  TextElement text(const json& v, const std::string& path) {
    if (!v.is_object()) throw ScreenParseError(path, "expected object");
    TextElement t;
    t.id = require_string(v, "id", path);
    claim_id(t.id, path + ".id");
    t.bbox = bbox(require(v, "bbox", path), path + ".bbox");
    t.content = std::string(trim(require_string(v, "content", path)));
    if (t.content.empty()) throw ScreenParseError(path + ".content", "must not be empty");
    return t;
  }

  ButtonGroup group(const json& v, const std::string& path) {
    if (!v.is_object()) throw ScreenParseError(path, "expected object");
    ButtonGroup g;
    g.id = require_string(v, "id", path);
    const auto& members = require(v, "members", path);
    if (!members.is_array() || members.empty()) throw ScreenParseError(path + ".members", "expected non-empty array");
    for (const auto& m : members) {
      if (!m.is_string()) throw ScreenParseError(path + ".members", "expected element id strings");
      g.members.push_back(m.get<std::string>());
    }
    return g;
  }

  const LabelSet& labels_;
  std::vector<ScreenWarning>* warnings_;
  LoadOptions options_;
  std::int64_t width_ = 0;
  std::int64_t height_ = 0;
  std::set<std::string> ids_;
};

json bbox_json(const BBox& b) { return json::array({b.x, b.y, b.w, b.h}); }

}  // namespace

Screen load_screen(const json& doc, const LabelSet& labels, std::vector<ScreenWarning>* warnings,
                   LoadOptions options) {
  return Parser(labels, warnings, options).parse(doc);
}

Screen load_screen_file(const std::filesystem::path& path, const LabelSet& labels,
                        std::vector<ScreenWarning>* warnings) {
  std::ifstream in(path);
  if (!in) throw ScreenParseError(path.string(), "cannot open annotation file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ScreenParseError(path.string(), std::string("invalid JSON: ") + e.what());
  }
  return load_screen(doc, labels, warnings);
}

json save_screen(const Screen& s) {
  json doc = {{"id", s.id}, {"width", s.width}, {"height", s.height}};
  if (s.image) doc["image"] = *s.image;
  json graphics = json::array();
  for (const auto& g : s.graphics) {
    json e = {{"id", g.id}, {"bbox", bbox_json(g.bbox)}, {"confidence", g.confidence}};
    if (!g.label.empty()) e["label"] = g.label;
    graphics.push_back(std::move(e));
  }
  json texts = json::array();
  for (const auto& t : s.texts) {
    texts.push_back({{"id", t.id}, {"bbox", bbox_json(t.bbox)}, {"content", t.content}});
  }
  doc["graphics"] = std::move(graphics);
  doc["texts"] = std::move(texts);
  if (!s.button_groups.empty()) {
    json groups = json::array();
    for (const auto& g : s.button_groups) groups.push_back({{"id", g.id}, {"members", g.members}});
    doc["button_groups"] = std::move(groups);
  }
  return doc;
}

ScreenStore ScreenStore::load_directory(const std::filesystem::path& dir, const LabelSet& labels) {
  ScreenStore store;
  if (!std::filesystem::is_directory(dir)) throw DatasetError("screens directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) store.add(load_screen_file(f, labels));
  return store;
}

void ScreenStore::add(Screen screen) {
  auto id = screen.id;
  if (!screens_.emplace(id, std::move(screen)).second) throw DatasetError("duplicate screen id " + id);
}

const Screen* ScreenStore::find(const std::string& id) const {
  auto it = screens_.find(id);
  return it == screens_.end() ? nullptr : &it->second;
}

std::vector<std::string> ScreenStore::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : screens_) out.push_back(id);
  return out;
}

// ----- providers -------------------------------------------------------------

json post_json(const std::string& url, const json& body, int timeout_seconds) {
  if (url.rfind("https://", 0) == 0) throw ProviderError(url, "https is not supported (built without TLS)");
  auto scheme_end = url.find("://");
  auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  auto path_start = url.find('/', host_start);
  std::string host = path_start == std::string::npos ? url : url.substr(0, path_start);
  std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(host);
  client.set_connection_timeout(timeout_seconds, 0);
  client.set_read_timeout(timeout_seconds, 0);
  auto res = client.Post(path, body.dump(), "application/json");
  if (!res) throw ProviderError(url, "request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw ProviderError(url, "HTTP status " + std::to_string(res->status));
  try {
    return json::parse(res->body);
  } catch (const json::parse_error& e) {
    throw ProviderError(url, std::string("invalid JSON reply: ") + e.what());
  }
}

FixtureDetector::FixtureDetector(const std::filesystem::path& path) : name_(path.string()) {
  std::ifstream in(path);
  if (!in) throw ProviderError(name_, "cannot open detector fixture");
  try {
    recordings_ = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ProviderError(name_, std::string("invalid JSON: ") + e.what());
  }
  if (!recordings_.is_object()) throw ProviderError(name_, "fixture must be a JSON object");
}

FixtureDetector::FixtureDetector(json recordings, std::string name)
    : recordings_(std::move(recordings)), name_(std::move(name)) {}

json FixtureDetector::detect(const std::string& image_ref) const {
  auto it = recordings_.find(image_ref);
  if (it == recordings_.end()) throw FixtureMissError(name_, image_ref);
  return *it;
}

RemoteDetector::RemoteDetector(std::string url, json settings) : url_(std::move(url)), settings_(std::move(settings)) {}

json RemoteDetector::detect(const std::string& image_ref) const {
  return post_json(url_, {{"image", image_ref}, {"settings", settings_}});
}

namespace {

IconLabel parse_icon_label(const json& v, const std::string& where) {
  if (v.is_string()) return {v.get<std::string>(), std::nullopt};
  if (v.is_object() && v.contains("label") && v.at("label").is_string()) {
    IconLabel l{v.at("label").get<std::string>(), std::nullopt};
    if (auto c = v.find("confidence"); c != v.end() && c->is_number()) l.confidence = c->get<double>();
    return l;
  }
  throw ProviderError(where, "malformed label entry " + v.dump());
}

}  // namespace

FixtureLabeler::FixtureLabeler(const std::filesystem::path& path) : name_(path.string()) {
  std::ifstream in(path);
  if (!in) throw ProviderError(name_, "cannot open labeler fixture");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ProviderError(name_, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ProviderError(name_, "fixture must be a JSON object");
  for (auto it = doc.begin(); it != doc.end(); ++it) labels_.emplace(it.key(), parse_icon_label(it.value(), name_));
}

FixtureLabeler::FixtureLabeler(std::map<std::string, IconLabel> labels, std::string name)
    : labels_(std::move(labels)), name_(std::move(name)) {}

std::map<std::string, IconLabel> FixtureLabeler::label(const Screen& screen) const {
  std::map<std::string, IconLabel> out;
  for (const auto& g : screen.graphics) {
    if (auto it = labels_.find(g.id); it != labels_.end()) out.emplace(g.id, it->second);
  }
  return out;
}

RemoteLabeler::RemoteLabeler(std::string url) : url_(std::move(url)) {}

std::map<std::string, IconLabel> RemoteLabeler::label(const Screen& screen) const {
  json elements = json::array();
  for (const auto& g : screen.graphics) {
    elements.push_back({{"id", g.id}, {"bbox", bbox_json(g.bbox)}});
  }
  json body = {{"screen_id", screen.id}, {"graphics", elements}};
  if (screen.image) body["image"] = *screen.image;
  json reply = post_json(url_, body);
  if (!reply.is_object() || !reply.contains("graphics") || !reply.at("graphics").is_array()) {
    throw ProviderError(url_, "reply must be {\"graphics\": [...]}");
  }
  std::map<std::string, IconLabel> out;
  for (const auto& item : reply.at("graphics")) {
    if (!item.is_object() || !item.contains("id") || !item.at("id").is_string()) {
      throw ProviderError(url_, "malformed label entry " + item.dump());
    }
    out.emplace(item.at("id").get<std::string>(), parse_icon_label(item, url_));
  }
  return out;
}

Screen label_graphics(Screen screen, const IconLabeler& labeler, const LabelSet& labels) {
  std::map<std::string, IconLabel> assigned;
  try {
    assigned = labeler.label(screen);
  } catch (const ProviderError&) {
    throw;
  } catch (const std::exception& e) {
    throw ProviderError(labeler.describe(), e.what());
  }
  std::vector<std::string> missing;
  for (auto& g : screen.graphics) {
    if (auto it = assigned.find(g.id); it != assigned.end()) {
      auto label = std::string(trim(it->second.label));
      if (!labels.contains(label)) {
        throw ProviderError(labeler.describe(), "unknown label \"" + label + "\" for element " + g.id);
      }
      g.label = std::move(label);
      if (it->second.confidence) g.confidence = *it->second.confidence;
    }
    if (g.label.empty()) missing.push_back(g.id);
  }
  if (!missing.empty()) {
    std::string ids;
    for (const auto& id : missing) ids += (ids.empty() ? "" : ", ") + id;
    throw ProviderError(labeler.describe(), "unlabeled graphic elements: " + ids);
  }
  return screen;
}

Screen detect_elements(const std::string& image_ref, const ElementDetector& detector, const IconLabeler* labeler,
                       const LabelSet& labels, std::vector<ScreenWarning>* warnings) {
  json doc;
  try {
    doc = detector.detect(image_ref);
  } catch (const ProviderError&) {
    throw;
  } catch (const std::exception& e) {
    throw ProviderError(detector.describe(), e.what());
  }
  if (doc.is_object() && !doc.contains("image")) doc["image"] = image_ref;
  Screen screen = load_screen(doc, labels, warnings, LoadOptions{.allow_unlabeled = true});
  bool unlabeled = std::any_of(screen.graphics.begin(), screen.graphics.end(),
                               [](const GraphicElement& g) { return g.label.empty(); });
  if (unlabeled) {
    if (!labeler) throw ProviderError(detector.describe(), "detector returned unlabeled graphics and no labeler is configured");
    screen = label_graphics(std::move(screen), *labeler, labels);
  }
  return screen;
}

}  // namespace grounding
