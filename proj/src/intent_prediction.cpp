#include "grounding/intent_prediction.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include <httplib.h>
#include <json.hpp>

#include "grounding/error.hpp"
#include "grounding/text.hpp"

namespace grounding {

using nlohmann::json;

Intent::Intent(std::string_view text, IntentSource source) : text_(trim(text)), source_(source) {
  if (text_.empty()) throw InvalidIntentError("intent text is empty");
}

std::string build_prompt(const Intent& intent, const PredictorConfig& cfg) {
  if (to_lower(intent.text()).find(to_lower(kMaskToken)) != std::string::npos) {
    throw InvalidIntentError("intent already contains " + std::string(kMaskToken));
  }
  std::string_view body = intent.text();
  while (!body.empty() && (body.back() == '.' || body.back() == '!' || body.back() == '?')) {
    body.remove_suffix(1);
    body = trim(body);
  }
  if (body.empty()) throw InvalidIntentError("intent has no content besides punctuation");
  return std::string(body) + cfg.template_suffix;
}

std::vector<DescriptiveWord> normalize_predictions(std::vector<WordScore> raw, std::size_t k,
                                                   const std::string& provider) {
  std::vector<WordScore> unique;
  std::unordered_map<std::string, std::size_t> seen;
  for (auto& ws : raw) {
    if (!std::isfinite(ws.probability) || ws.probability <= 0.0 || ws.probability > 1.0) {
      throw ProviderError(provider, "probability out of (0,1] for word \"" + ws.word + "\"");
    }
    auto word = normalize_word(ws.word);
    if (word.empty()) throw ProviderError(provider, "empty predicted word");
    auto [it, inserted] = seen.emplace(word, unique.size());
    if (inserted) {
      unique.push_back({std::move(word), ws.probability});
    } else {
      auto& kept = unique[it->second];
      kept.probability = std::max(kept.probability, ws.probability);
    }
  }
  // Stable so equal probabilities keep provider order.
  std::stable_sort(unique.begin(), unique.end(),
                   [](const WordScore& a, const WordScore& b) { return a.probability > b.probability; });
  if (unique.size() > k) unique.resize(k);

  std::vector<DescriptiveWord> out;
  out.reserve(unique.size());
  int rank = 1;
  for (auto& ws : unique) out.push_back({rank++, std::move(ws.word), ws.probability});
  return out;
}

std::vector<DescriptiveWord> predict_words(const std::string& prompt, const PredictorConfig& cfg,
                                           const WordPredictor& predictor) {
  auto first = prompt.find(kMaskToken);
  if (first == std::string::npos || prompt.find(kMaskToken, first + 1) != std::string::npos) {
    throw InvalidIntentError("prompt must contain exactly one " + std::string(kMaskToken));
  }
  return normalize_predictions(predictor.query(prompt, cfg.k), cfg.k, predictor.describe());
}

// ---------------------------------------------------------------------------

namespace {

std::vector<WordScore> parse_fixture_list(const json& list, const std::string& where) {
  if (!list.is_array()) throw ProviderError(where, "fixture entry must be an array");
  std::vector<WordScore> out;
  for (const auto& item : list) {
    if (item.is_array() && item.size() == 2 && item[0].is_string() && item[1].is_number()) {
      out.push_back({item[0].get<std::string>(), item[1].get<double>()});
    } else if (item.is_object() && item.contains("word") && item.contains("probability")) {
      out.push_back({item.at("word").get<std::string>(), item.at("probability").get<double>()});
    } else {
      throw ProviderError(where, "malformed fixture item " + item.dump());
    }
  }
  return out;
}

}  // namespace

FixturePredictor::FixturePredictor(const std::filesystem::path& path) : name_(path.string()) {
  std::ifstream in(path);
  if (!in) throw ProviderError(name_, "cannot open predictor fixture");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ProviderError(name_, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ProviderError(name_, "fixture must be a JSON object");
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    table_.emplace(it.key(), parse_fixture_list(it.value(), name_));
  }
}

FixturePredictor::FixturePredictor(std::map<std::string, std::vector<WordScore>> table, std::string name)
    : table_(std::move(table)), name_(std::move(name)) {}

std::vector<WordScore> FixturePredictor::query(const std::string& prompt, std::size_t) const {
  auto it = table_.find(prompt);
  if (it == table_.end()) throw FixtureMissError(name_, prompt);
  return it->second;
}

RemotePredictor::RemotePredictor(std::string url, std::chrono::milliseconds timeout)
    : url_(std::move(url)), timeout_(timeout) {
  if (url_.rfind("https://", 0) == 0) throw ProviderError(url_, "https is not supported (built without TLS)");
  auto scheme_end = url_.find("://");
  auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  auto path_start = url_.find('/', host_start);
  host_ = path_start == std::string::npos ? url_ : url_.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url_.substr(path_start);
  if (host_start >= url_.size()) throw ProviderError(url_, "invalid predictor URL");
}

std::vector<WordScore> RemotePredictor::query(const std::string& prompt, std::size_t k) const {
  httplib::Client client(host_);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());

  json body = {{"prompt", prompt}, {"k", k}};
  auto res = client.Post(path_, body.dump(), "application/json");
  if (!res) throw ProviderError(url_, "request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw ProviderError(url_, "HTTP status " + std::to_string(res->status));
  json reply;
  try {
    reply = json::parse(res->body);
  } catch (const json::parse_error& e) {
    throw ProviderError(url_, std::string("invalid JSON reply: ") + e.what());
  }
  try {
    return parse_fixture_list(reply, url_);
  } catch (const json::exception& e) {
    throw ProviderError(url_, std::string("malformed reply: ") + e.what());
  }
}

std::unique_ptr<WordPredictor> make_predictor(const PredictorConfig& cfg) {
  if (cfg.fixture_path) return std::make_unique<FixturePredictor>(*cfg.fixture_path);
  if (cfg.endpoint) return std::make_unique<RemotePredictor>(*cfg.endpoint, cfg.timeout);
  throw Error("no predictor configured (use fixture:<path> or remote:<url>)");
}

void apply_predictor_spec(std::string_view spec, PredictorConfig& cfg) {
  constexpr std::string_view fixture = "fixture:";
  constexpr std::string_view remote = "remote:";
  if (spec.starts_with(fixture)) {
    cfg.fixture_path = std::filesystem::path(std::string(spec.substr(fixture.size())));
  } else if (spec.starts_with(remote)) {
    cfg.endpoint = std::string(spec.substr(remote.size()));
  } else {
    throw Error("predictor spec must be fixture:<path> or remote:<url>, got \"" + std::string(spec) + "\"");
  }
}

}  // namespace grounding
