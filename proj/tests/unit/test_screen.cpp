#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <json.hpp>

#include "grounding/error.hpp"
#include "grounding/screen.hpp"
#include "test_server.hpp"

using namespace grounding;
using nlohmann::json;
using ::testing::HasSubstr;

namespace {

json basic_doc() {
  return json::parse(R"({
    "id": "s1", "width": 100, "height": 200,
    "graphics": [
      {"id": "g1", "bbox": [0, 0, 10, 10], "label": "cart", "confidence": 0.8},
      {"id": "g2", "bbox": [20, 0, 10, 10], "label": "negative"}
    ],
    "texts": [
      {"id": "t1", "bbox": [0, 20, 50, 10], "content": "Cart"},
      {"id": "t2", "bbox": [0, 40, 50, 10], "content": "Checkout"},
      {"id": "t3", "bbox": [0, 60, 50, 10], "content": " Help "}
    ],
    "button_groups": [{"id": "b1", "members": ["g1", "t1"]}]
  })");
}

std::string parse_error_path(const json& doc) {
  try {
    load_screen(doc, LabelSet::defaults());
  } catch (const ScreenParseError& e) {
    return e.path();
  }
  return "<no error>";
}

}  // namespace

TEST(BBox, GeometryHelpers) {
  auto a = BBox::make(0, 0, 10, 10);
  auto b = BBox::make(5, 5, 10, 10);
  EXPECT_EQ(intersection_area(a, b), 25);
  EXPECT_EQ(intersection_area(a, BBox::make(10, 0, 5, 5)), 0);  // touching edges
  EXPECT_EQ(bbox_union(a, b), BBox::make(0, 0, 15, 15));
  EXPECT_THROW(BBox::make(0, 0, 0, 5), std::invalid_argument);
  EXPECT_TRUE(reads_before(BBox::make(50, 0, 1, 1), BBox::make(0, 1, 1, 1)));
  EXPECT_TRUE(reads_before(BBox::make(0, 5, 1, 1), BBox::make(3, 5, 1, 1)));
}

TEST(LoadScreen, CountsElements) {
  auto s = load_screen(basic_doc(), LabelSet::defaults());
  EXPECT_EQ(s.element_count(), 5u);
  EXPECT_EQ(s.graphics[0].confidence, 0.8);
  EXPECT_EQ(s.graphics[1].confidence, 1.0);
  EXPECT_EQ(s.texts[2].content, "Help");
  EXPECT_EQ(s.bbox_of("t2"), BBox::make(0, 40, 50, 10));
  EXPECT_FALSE(s.bbox_of("zz").has_value());
  EXPECT_EQ(s.element_boxes().size(), 5u);
}

TEST(LoadScreen, UnknownLabelIsNamed) {
  auto doc = basic_doc();
  doc["graphics"][0]["label"] = "cursor";
  try {
    load_screen(doc, LabelSet::defaults());
    FAIL();
  } catch (const ScreenParseError& e) {
    EXPECT_EQ(e.path(), "$.graphics[0].label");
    EXPECT_THAT(e.what(), HasSubstr("cursor"));
  }
}

TEST(LoadScreen, ClampsOverflowingBoxWithWarning) {
  auto doc = basic_doc();
  doc["graphics"][0]["bbox"] = {95, 0, 8, 10};  // 3px past the width
  std::vector<ScreenWarning> warnings;
  auto s = load_screen(doc, LabelSet::defaults(), &warnings);
  EXPECT_EQ(s.graphics[0].bbox, BBox::make(95, 0, 5, 10));
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_EQ(warnings[0].path, "$.graphics[0].bbox");
}

TEST(LoadScreen, StructuralErrorsCarryPaths) {
  auto doc = basic_doc();
  doc["graphics"][1]["id"] = "g1";
  EXPECT_EQ(parse_error_path(doc), "$.graphics[1].id");

  doc = basic_doc();
  doc["texts"][0]["bbox"] = {200, 0, 5, 5};
  EXPECT_EQ(parse_error_path(doc), "$.texts[0].bbox");

  doc = basic_doc();
  doc["graphics"][0]["confidence"] = 1.5;
  EXPECT_EQ(parse_error_path(doc), "$.graphics[0].confidence");

  doc = basic_doc();
  doc["button_groups"][0]["members"] = {"g1", "nope"};
  EXPECT_EQ(parse_error_path(doc), "$.button_groups[0].members[1]");

  doc = basic_doc();
  doc.erase("width");
  EXPECT_EQ(parse_error_path(doc), "$.width");

  doc = basic_doc();
  doc["graphics"][0].erase("label");
  EXPECT_EQ(parse_error_path(doc), "$.graphics[0].label");
}

TEST(LoadScreen, SaveRoundTrip) {
  auto s = load_screen(basic_doc(), LabelSet::defaults());
  EXPECT_EQ(load_screen(save_screen(s), LabelSet::defaults()), s);
}

TEST(ScreenStore, RejectsDuplicateIds) {
  ScreenStore store;
  store.add(load_screen(basic_doc(), LabelSet::defaults()));
  EXPECT_THROW(store.add(load_screen(basic_doc(), LabelSet::defaults())), DatasetError);
  EXPECT_NE(store.find("s1"), nullptr);
  EXPECT_EQ(store.find("s2"), nullptr);
}

TEST(ScreenStore, LoadsFixtureDirectory) {
  auto store = ScreenStore::load_directory(GROUNDING_FIXTURE_DIR "/pipeline/screens", LabelSet::defaults());
  EXPECT_EQ(store.ids(), (std::vector<std::string>{"notes", "player_mosaic", "settings", "shop"}));
}

TEST(Detection, FixtureReplayIsStable) {
  json recorded = {{"shot.png", basic_doc()}};
  FixtureDetector detector(recorded);
  auto a = detect_elements("shot.png", detector, nullptr, LabelSet::defaults());
  auto b = detect_elements("shot.png", detector, nullptr, LabelSet::defaults());
  EXPECT_EQ(a, b);
  // Replaying equals loading the saved adaptation of the same response.
  EXPECT_EQ(load_screen(save_screen(a), LabelSet::defaults()), a);
  EXPECT_EQ(a.image, std::optional<std::string>("shot.png"));
}

TEST(Detection, ZeroElementsIsValid) {
  json recorded = {{"blank.png", {{"id", "blank"}, {"width", 10}, {"height", 10}}}};
  FixtureDetector detector(recorded);
  auto s = detect_elements("blank.png", detector, nullptr, LabelSet::defaults());
  EXPECT_EQ(s.element_count(), 0u);
}

TEST(Detection, UnknownImageIsAProviderError) {
  FixtureDetector detector(json::object());
  EXPECT_THROW(detect_elements("x.png", detector, nullptr, LabelSet::defaults()), ProviderError);
}

TEST(Labeling, AppliesFixtureLabelsVerbatim) {
  json doc = basic_doc();
  doc["graphics"][0].erase("label");
  doc["graphics"][1].erase("label");
  FixtureDetector detector(json{{"a.png", doc}});
  FixtureLabeler labeler({{"g1", {"bag", 0.6}}, {"g2", {"negative", std::nullopt}}});
  auto s = detect_elements("a.png", detector, &labeler, LabelSet::defaults());
  EXPECT_EQ(s.graphics[0].label, "bag");
  EXPECT_DOUBLE_EQ(s.graphics[0].confidence, 0.6);
  // Banner imagery keeps the negative label and stays on screen.
  EXPECT_EQ(s.graphics[1].label, "negative");
  EXPECT_EQ(s.graphics.size(), 2u);
}

TEST(Labeling, UnlabeledElementsAreListed) {
  json doc = basic_doc();
  doc["graphics"][0].erase("label");
  doc["graphics"][1].erase("label");
  FixtureDetector detector(json{{"a.png", doc}});
  FixtureLabeler labeler({{"g1", {"bag", std::nullopt}}});
  try {
    detect_elements("a.png", detector, &labeler, LabelSet::defaults());
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_THAT(e.what(), HasSubstr("g2"));
  }
  FixtureLabeler bad({{"g1", {"cursor", std::nullopt}}, {"g2", {"bag", std::nullopt}}});
  EXPECT_THROW(detect_elements("a.png", detector, &bad, LabelSet::defaults()), ProviderError);
  EXPECT_THROW(detect_elements("a.png", detector, nullptr, LabelSet::defaults()), ProviderError);
}

TEST(RemoteProviders, DetectorAndLabelerContracts) {
  httplib::Server server;
  json doc = basic_doc();
  doc["graphics"][0].erase("label");
  server.Post("/detect", [&](const httplib::Request& req, httplib::Response& res) {
    auto body = json::parse(req.body);
    EXPECT_EQ(body.at("image"), "shot.png");
    EXPECT_TRUE(body.at("settings").is_object());
    res.set_content(doc.dump(), "application/json");
  });
  server.Post("/label", [&](const httplib::Request& req, httplib::Response& res) {
    auto body = json::parse(req.body);
    EXPECT_EQ(body.at("screen_id"), "s1");
    EXPECT_EQ(body.at("graphics").size(), 2u);
    res.set_content(R"({"graphics": [{"id": "g1", "label": "star", "confidence": 0.7}]})", "application/json");
  });
  grounding::testing::LocalServer local(server);
  RemoteDetector detector(local.url("/detect"));
  RemoteLabeler labeler(local.url("/label"));
  auto s = detect_elements("shot.png", detector, &labeler, LabelSet::defaults());
  EXPECT_EQ(s.graphics[0].label, "star");
  EXPECT_DOUBLE_EQ(s.graphics[0].confidence, 0.7);
  EXPECT_EQ(s.graphics[1].label, "negative");
}

TEST(RemoteProviders, RejectHttps) {
  EXPECT_THROW(RemoteDetector("https://example.invalid/detect").detect("a.png"), ProviderError);
}
