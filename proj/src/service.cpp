#include "grounding/service.hpp"

#include <random>

#include <httplib.h>

#include "grounding/error.hpp"

namespace grounding {

using nlohmann::json;

namespace {

HttpReply error_reply(int status, const std::string& message) {
  return {status, json{{"error", message}}.dump()};
}

std::uint64_t parse_seed(const json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    std::size_t used = 0;
    auto value = std::stoull(s, &used);
    if (used == s.size()) return value;
  }
  throw std::invalid_argument("seed must be a non-negative integer");
}

}  // namespace

GroundingService::GroundingService(std::shared_ptr<const LexiconDb> db, ScreenStore screens, GroundingConfig cfg,
                                   std::shared_ptr<const WordPredictor> predictor, ServiceOptions options)
    : db_(std::move(db)),
      screens_(std::move(screens)),
      cfg_(std::move(cfg)),
      predictor_(std::move(predictor)),
      options_(options) {
  if (!db_) throw Error("service requires a lexicon db");
  if (!predictor_) throw Error("service requires a predictor");
}

Seed GroundingService::draw_seed() const {
  if (options_.seed_policy == SeedPolicy::fixed) return options_.fixed_seed;
  thread_local std::random_device device;
  // 53 bits keeps the echoed seed exact for JavaScript clients.
  std::uint64_t v = (static_cast<std::uint64_t>(device()) << 32) ^ device();
  return Seed{v & ((std::uint64_t{1} << 53) - 1)};
}

HttpReply GroundingService::handle_ground(const std::string& body) const {
  json req;
  try {
    req = json::parse(body);
  } catch (const json::parse_error& e) {
    return error_reply(400, std::string("invalid JSON: ") + e.what());
  }
  if (!req.is_object()) return error_reply(400, "request body must be an object");
  auto intent_it = req.find("intent");
  if (intent_it == req.end() || !intent_it->is_string()) return error_reply(400, "\"intent\" must be a string");

  std::optional<Screen> inline_screen;
  const Screen* screen = nullptr;
  if (auto s = req.find("screen"); s != req.end()) {
    try {
      inline_screen = load_screen(*s, db_->label_set());
    } catch (const ScreenParseError& e) {
      return error_reply(400, std::string("screen: ") + e.what());
    }
    screen = &*inline_screen;
  } else if (auto id = req.find("screen_id"); id != req.end() && id->is_string()) {
    screen = screens_.find(id->get<std::string>());
    if (!screen) return error_reply(404, "unknown screen \"" + id->get<std::string>() + "\"");
  } else {
    return error_reply(400, "one of \"screen_id\" or \"screen\" is required");
  }

  Seed seed;
  if (auto s = req.find("seed"); s != req.end() && !s->is_null()) {
    try {
      seed = Seed{parse_seed(*s)};
    } catch (const std::exception& e) {
      return error_reply(400, e.what());
    }
  } else {
    seed = draw_seed();
  }

  try {
    Intent intent(intent_it->get<std::string>());
    auto result = ground(intent, *screen, *db_, cfg_, *predictor_, seed);
    json out = to_json(result);
    out["screen_id"] = screen->id;
    return {200, out.dump()};
  } catch (const InvalidIntentError& e) {
    return error_reply(400, e.what());
  } catch (const StageError& e) {
    if (e.stage() == "prompt") return error_reply(400, e.what());
    return error_reply(502, e.what());
  } catch (const std::exception& e) {
    return error_reply(500, e.what());
  }
}

HttpReply GroundingService::handle_list_screens() const {
  return {200, json(screens_.ids()).dump()};
}

HttpReply GroundingService::handle_get_screen(const std::string& id) const {
  const Screen* s = screens_.find(id);
  if (!s) return error_reply(404, "unknown screen \"" + id + "\"");
  return {200, save_screen(*s).dump()};
}

json GroundingService::db_stats() const {
  const auto& meta = db_->metadata();
  json top = json::array();
  for (const auto& lc : db_->top_labels(options_.stats_top_k)) {
    top.push_back({{"label", lc.label}, {"pairs", lc.count}, {"share", lc.percentage}});
  }
  return {{"pairs", meta.pair_total},
          {"words", meta.word_total},
          {"labels", db_->label_set().size()},
          {"source", meta.source},
          {"top_labels", std::move(top)}};
}

HttpReply GroundingService::handle_db_stats() const { return {200, db_stats().dump()}; }

void GroundingService::mount(httplib::Server& server) const {
  auto send = [](httplib::Response& res, const HttpReply& reply) {
    res.status = reply.status;
    res.set_content(reply.body, "application/json");
  };
  server.Post("/ground", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, handle_ground(req.body));
  });
  server.Get("/screens", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, handle_list_screens());
  });
  server.Get(R"(/screens/([^/]+))", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, handle_get_screen(req.matches[1]));
  });
  server.Get("/db/stats", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, handle_db_stats());
  });
}

}  // namespace grounding
