#pragma once

#include <memory>
#include <string>

#include <json.hpp>

#include "grounding/grounding.hpp"
#include "grounding/lexicon_db.hpp"
#include "grounding/screen.hpp"

namespace httplib {
class Server;
}

namespace grounding {

enum class SeedPolicy {
  fixed,        // requests without a seed use ServiceOptions::fixed_seed
  per_request,  // requests without a seed get a fresh one, echoed back
};

struct ServiceOptions {
  SeedPolicy seed_policy = SeedPolicy::per_request;
  Seed fixed_seed{0};
  std::size_t stats_top_k = 20;
};

struct HttpReply {
  int status = 200;
  std::string body;
};

/// HTTP front end over an immutable db and screen store.  Every handler is
/// const and may be called concurrently.
class GroundingService {
 public:
  GroundingService(std::shared_ptr<const LexiconDb> db, ScreenStore screens, GroundingConfig cfg,
                   std::shared_ptr<const WordPredictor> predictor, ServiceOptions options = {});

  /// POST /ground with {"intent", "screen_id" | "screen", "seed"?}.
  HttpReply handle_ground(const std::string& body) const;
  HttpReply handle_list_screens() const;
  HttpReply handle_get_screen(const std::string& id) const;
  HttpReply handle_db_stats() const;

  void mount(httplib::Server& server) const;

  nlohmann::json db_stats() const;

 private:
  Seed draw_seed() const;

  std::shared_ptr<const LexiconDb> db_;
  ScreenStore screens_;
  GroundingConfig cfg_;
  std::shared_ptr<const WordPredictor> predictor_;
  ServiceOptions options_;
};

}  // namespace grounding
