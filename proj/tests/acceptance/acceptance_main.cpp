// Acceptance suite.  Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.  Tolerances and runtime budgets are fixed
// constants below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "grounding/eval.hpp"
#include "grounding/grounding.hpp"
#include "grounding/service.hpp"
#include "grounding/voting.hpp"

using namespace grounding;
using nlohmann::json;

namespace {

std::string g_fixture_dir = GROUNDING_FIXTURE_DIR;

// ----- reporting -------------------------------------------------------------

struct Check {
  std::vector<std::string> failures;
  int checks = 0;

  void expect(bool ok, const std::string& what) {
    ++checks;
    if (!ok) failures.push_back(what);
  }
  void near(double actual, double expected, double tol, const std::string& what) {
    std::ostringstream msg;
    msg.precision(10);
    msg << what << ": got " << actual << ", want " << expected << " +/- " << tol;
    expect(std::fabs(actual - expected) <= tol, msg.str());
  }
};

struct Criterion {
  const char* id;
  const char* title;
  double budget_ms;
  std::function<void(Check&)> body;
};

// ----- exact rationals for the oracle ---------------------------------------

struct Rational {
  __int128 num = 0;
  __int128 den = 1;

  static __int128 gcd(__int128 a, __int128 b) {
    if (a < 0) a = -a;
    while (b != 0) {
      auto t = a % b;
      a = b;
      b = t;
    }
    return a == 0 ? 1 : a;
  }
  Rational() = default;
  Rational(__int128 n, __int128 d) : num(n), den(d) {
    auto g = gcd(num, den);
    num /= g;
    den /= g;
  }
  friend Rational operator+(const Rational& a, const Rational& b) {
    return Rational(a.num * b.den + b.num * a.den, a.den * b.den);
  }
  friend Rational operator*(const Rational& a, const Rational& b) { return Rational(a.num * b.num, a.den * b.den); }
  friend Rational operator/(const Rational& a, __int128 k) { return Rational(a.num, a.den * k); }
  friend bool operator<(const Rational& a, const Rational& b) { return a.num * b.den < b.num * a.den; }
  friend bool operator==(const Rational& a, const Rational& b) { return a.num == b.num && a.den == b.den; }
};

// Independent re-implementation of the thirteen agents over raw pair counts.
struct Oracle {
  std::map<std::string, std::map<std::string, std::int64_t>> counts;  // word -> label -> c

  std::int64_t total(const std::string& w) const {
    std::int64_t t = 0;
    for (const auto& [l, c] : counts.at(w)) t += c;
    return t;
  }
  std::pair<std::string, std::int64_t> top(const std::string& w) const {
    std::pair<std::string, std::int64_t> best{"", -1};
    for (const auto& [l, c] : counts.at(w)) {  // map order = label ascending
      if (c > best.second) best = {l, c};
    }
    return best;
  }
  static std::vector<std::string> argmax(const std::map<std::string, Rational>& scores) {
    std::vector<std::string> out;
    if (scores.empty()) return out;
    Rational best = scores.begin()->second;
    for (const auto& [l, s] : scores) {
      if (best < s) best = s;
    }
    for (const auto& [l, s] : scores) {
      if (s == best) out.push_back(l);
    }
    return out;
  }
  // p given as integer percent so p*q stays an exact rational.
  std::vector<std::string> vote(int agent, const std::vector<std::pair<std::string, int>>& words) const {
    std::map<std::string, Rational> s;
    std::map<std::string, int> n;
    for (const auto& [w, p_pct] : words) {
      if (!counts.contains(w)) continue;
      const Rational p(p_pct, 100);
      const auto t = total(w);
      auto [top_label, top_count] = top(w);
      const Rational q(top_count, t);
      switch (agent) {
        case 11: s[top_label] = s[top_label] + Rational(1, 1); break;
        case 12: case 16: s[top_label] = s[top_label] + q; ++n[top_label]; break;
        case 13: case 17: s[top_label] = s[top_label] + p * q; ++n[top_label]; break;
        case 14: for (const auto& [l, c] : counts.at(w)) s[l] = s[l] + Rational(c, 1); break;
        case 15: case 18:
          for (const auto& [l, c] : counts.at(w)) {
            s[l] = s[l] + Rational(c, t);
            ++n[l];
          }
          break;
        default: {  // exhaustive random agent: modal labels per word
          std::map<std::string, Rational> freq;
          for (const auto& [l, c] : counts.at(w)) freq[l] = Rational(c, 1);
          for (const auto& l : argmax(freq)) s[l] = s[l] + Rational(1, 1);
        }
      }
    }
    if (agent == 16 || agent == 17 || agent == 18) {
      for (auto& [l, v] : s) v = v / n.at(l);
    }
    return argmax(s);
  }
};

struct OracleTally {
  std::string label;
  int votes = 0;
  int det = 0;
};

std::vector<std::string> oracle_ranking(const std::vector<std::vector<std::string>>& votes) {
  std::map<std::string, OracleTally> t;
  for (std::size_t a = 0; a < votes.size(); ++a) {
    for (const auto& l : votes[a]) {
      auto& e = t[l];
      e.label = l;
      ++e.votes;
      if (a < 8) ++e.det;
    }
  }
  std::vector<OracleTally> v;
  for (auto& [l, e] : t) v.push_back(e);
  std::sort(v.begin(), v.end(), [](const OracleTally& a, const OracleTally& b) {
    if (a.votes != b.votes) return a.votes > b.votes;
    if (a.det != b.det) return a.det > b.det;
    return a.label < b.label;
  });
  std::vector<std::string> out;
  for (const auto& e : v) out.push_back(e.label);
  return out;
}

constexpr int kOracleAgentCodes[8] = {11, 12, 13, 14, 15, 16, 17, 18};

std::string join(const std::vector<std::string>& v) {
  std::string s = "{";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s + "}";
}

LexiconDb db_from_records(const std::vector<PairRecord>& records) {
  return LexiconDb::ingest(std::span<const PairRecord>(records), LabelSet::defaults());
}

// ----- AC1 ------------------------------------------------------------------

void ac1_voting_arithmetic(Check& c) {
  constexpr double kTol = 1e-4;
  const std::vector<WordCandidate> cand{{"item", 0.217, "airplane", 0.04186},
                                        {"store", 0.0759, "cart", 0.16882},
                                        {"shopping", 0.0497, "cart", 0.26298},
                                        {"product", 0.0415, "barcode", 0.07617},
                                        {"purchase", 0.0374, "cart", 0.22665}};
  auto f = accumulated_percentage(cand);
  auto g = weighted_percentage(cand);
  c.near(f["cart"], 0.65845, kTol, "f(cart)");
  c.near(f["airplane"], 0.04186, kTol, "f(airplane)");
  c.near(f["barcode"], 0.07617, kTol, "f(barcode)");
  c.near(g["cart"], 0.03436, kTol, "g(cart)");
  c.near(g["airplane"], 0.00908, kTol, "g(airplane)");
  c.near(g["barcode"], 0.00316, kTol, "g(barcode)");
  c.near(mean_percentage(cand)["cart"], 0.21948, kTol, "mean f(cart)");
  c.near(mean_weighted_percentage(cand)["cart"], 0.01145, kTol, "mean g(cart)");
  const std::pair<const char*, LabelScores> agents[] = {
      {"1.1", candidate_appearances(cand)}, {"1.2", f}, {"1.3", g},
      {"1.6", mean_percentage(cand)},       {"1.7", mean_weighted_percentage(cand)}};
  for (const auto& [name, scores] : agents) {
    auto v = argmax_labels(scores);
    c.expect(v == VoteSet{"cart"}, std::string("agent ") + name + " voted " + join(v));
  }
}

// ----- AC2 ------------------------------------------------------------------

void ac2_q_derivation(Check& c) {
  // 128 airplane pairs among 3,058; the other 2,930 are spread so that no
  // label reaches 128.
  std::vector<PairRecord> records{{"item", "airplane", 128}};
  std::uint64_t remaining = 2930;
  for (const auto& name : LabelSet::defaults().names()) {
    if (remaining == 0) break;
    if (name == "airplane") continue;
    auto n = std::min<std::uint64_t>(127, remaining);
    records.push_back({"item", name, n});
    remaining -= n;
  }
  auto db = db_from_records(records);
  c.expect(db.pair_count("item") == 3058, "item total " + std::to_string(db.pair_count("item")));
  auto top = db.top_label("item");
  c.expect(top.has_value() && top->label == "airplane", "top label is airplane");
  if (top) {
    c.near(top->percentage, 0.04186, 1e-5, "q(item, airplane)");
    c.expect(top->count == 128, "top count 128");
  }
}

// ----- AC3 ------------------------------------------------------------------

void ac3_oracle_equivalence(Check& c) {
  const auto labels = LabelSet::defaults().names();
  Rng rng(Seed{20240601});
  int mismatches = 0;
  for (int lex = 0; lex < 200; ++lex) {
    const std::size_t n_labels = 1 + rng.uniform_below(8);
    const std::size_t n_words = 1 + rng.uniform_below(20);
    std::vector<std::string> label_pool;
    for (std::size_t i = 0; i < n_labels; ++i) label_pool.push_back(labels[rng.uniform_below(labels.size())]);
    Oracle oracle;
    std::vector<PairRecord> records;
    std::vector<std::string> vocab;
    for (std::size_t w = 0; w < n_words; ++w) {
      std::string word = "w" + std::to_string(w);
      vocab.push_back(word);
      const std::size_t pairs = 1 + rng.uniform_below(50);
      for (std::size_t p = 0; p < pairs; ++p) {
        const auto& l = label_pool[rng.uniform_below(label_pool.size())];
        records.push_back({word, l, 1});
        ++oracle.counts[word][l];
      }
    }
    // Shuffle record order; the db must not care.
    for (std::size_t i = records.size(); i > 1; --i) std::swap(records[i - 1], records[rng.uniform_below(i)]);
    auto db = db_from_records(records);

    for (int trial = 0; trial < 5; ++trial) {
      std::vector<std::string> pool = vocab;
      pool.push_back("unseen_a");
      pool.push_back("unseen_b");
      std::vector<std::pair<std::string, int>> input;
      std::vector<DescriptiveWord> words;
      for (int k = 0; k < 5 && !pool.empty(); ++k) {
        auto idx = rng.uniform_below(pool.size());
        const int p_pct = 1 + static_cast<int>(rng.uniform_below(99));
        input.emplace_back(pool[idx], p_pct);
        words.push_back({k + 1, pool[idx], p_pct / 100.0});
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(idx));
      }
      const Seed seed{static_cast<std::uint64_t>(lex * 31 + trial)};
      std::vector<std::vector<std::string>> expected_votes;
      for (int a = 0; a < 8; ++a) {
        auto want = oracle.vote(kOracleAgentCodes[a], input);
        auto got = cast_vote(kAllAgents[a], words, db, seed);
        expected_votes.push_back(want);
        if (got != want && mismatches++ < 5) {
          c.expect(false, "lexicon " + std::to_string(lex) + " agent " + std::string(agent_name(kAllAgents[a])) +
                              ": got " + join(got) + " want " + join(want));
        }
      }
      // Agents 2.4 and 2.5 (n = 100, 200) exhaust every word (<= 50 pairs),
      // so they equal the per-word-mode tally.  Agents 2.1-2.3 are sampled;
      // the oracle takes their votes as given but checks they are plausible.
      auto ranking = classify(words, db, seed);
      for (int a = 8; a < 13; ++a) {
        const auto& got = ranking.agents[static_cast<std::size_t>(a)].labels;
        if (a >= 11) {
          auto want = oracle.vote(0, input);
          if (got != want && mismatches++ < 5) {
            c.expect(false, "lexicon " + std::to_string(lex) + " agent " +
                                std::string(agent_name(kAllAgents[a])) + ": got " + join(got) + " want " + join(want));
          }
        } else {
          for (const auto& l : got) {
            bool seen = false;
            for (const auto& [w, p] : input) seen = seen || (oracle.counts.contains(w) && oracle.counts.at(w).contains(l));
            c.expect(seen, "sampled vote for a label outside the inputs' distributions");
          }
        }
        expected_votes.push_back(got);
      }
      for (int a = 0; a < 8; ++a) {
        c.expect(ranking.agents[static_cast<std::size_t>(a)].labels == expected_votes[static_cast<std::size_t>(a)],
                 "classify agent record matches cast_vote");
      }
      auto want_rank = oracle_ranking(expected_votes);
      if (ranking.labels() != want_rank && mismatches++ < 5) {
        c.expect(false, "ranking " + join(ranking.labels()) + " want " + join(want_rank));
      }
      ++c.checks;
    }
  }
  c.expect(mismatches == 0, std::to_string(mismatches) + " oracle mismatches");
}

// ----- AC4 ------------------------------------------------------------------

void ac4_random_agents(Check& c) {
  // Large-count words make the samples genuinely random.
  std::vector<PairRecord> big{{"item", "cart", 400}, {"item", "bag", 390},  {"item", "dollar", 380},
                              {"store", "bag", 300}, {"store", "cart", 310}, {"shop", "cart", 700},
                              {"shop", "barcode", 650}};
  auto db = db_from_records(big);
  std::vector<DescriptiveWord> words{{1, "item", 0.3}, {2, "store", 0.2}, {3, "shop", 0.1}};
  const auto first = to_json(classify(words, db, Seed{424242})).dump();
  bool identical = true;
  for (int i = 0; i < 10; ++i) identical = identical && to_json(classify(words, db, Seed{424242})).dump() == first;
  c.expect(identical, "classify output differs across 10 runs with a fixed seed");

  // Exhaustion: every word has at most 10 pairs, so each random agent sees
  // the full distribution and equals the per-word-mode computation.
  Rng rng(Seed{99});
  const auto labels = LabelSet::defaults().names();
  for (int lex = 0; lex < 50; ++lex) {
    Oracle oracle;
    std::vector<PairRecord> records;
    std::vector<DescriptiveWord> input;
    std::vector<std::pair<std::string, int>> oracle_input;
    for (int w = 0; w < 5; ++w) {
      std::string word = "w" + std::to_string(w);
      auto pairs = 1 + rng.uniform_below(10);
      for (std::uint64_t p = 0; p < pairs; ++p) {
        const auto& l = labels[rng.uniform_below(4)];
        records.push_back({word, l, 1});
        ++oracle.counts[word][l];
      }
      input.push_back({w + 1, word, 0.1});
      oracle_input.emplace_back(word, 10);
    }
    auto ldb = db_from_records(records);
    auto want = oracle.vote(0, oracle_input);
    for (int a = 8; a < 13; ++a) {
      auto got = cast_vote(kAllAgents[a], input, ldb, Seed{static_cast<std::uint64_t>(lex)});
      c.expect(got == want, "exhaustive agent " + std::string(agent_name(kAllAgents[a])) + " got " + join(got) +
                                " want " + join(want));
    }
  }

  // Single-label db: all 13 agents vote it.
  auto single = db_from_records({{"a", "star", 120}, {"b", "star", 7}, {"c", "star", 333}});
  std::vector<DescriptiveWord> w3{{1, "a", 0.5}, {2, "b", 0.3}, {3, "c", 0.1}};
  for (std::uint64_t s = 0; s < 5; ++s) {
    auto r = classify(w3, single, Seed{s});
    c.expect(r.tallies.size() == 1 && r.tallies[0].label == "star" && r.tallies[0].votes == 13,
             "single-label db ranking is [star x13]");
  }
}

// ----- AC5 ------------------------------------------------------------------

void ac5_metric(Check& c) {
  const auto gt = BBox::make(0, 0, 100, 100);
  c.expect(overlap_correct(gt, gt), "identity");
  c.expect(!overlap_correct(BBox::make(300, 300, 50, 50), gt), "disjoint");
  c.expect(overlap_correct(BBox::make(75, 0, 100, 100), gt), "exactly 25% of gt (inclusive)");
  // 249/1000 of a 1000x1000 frame is 24.9%.
  c.expect(!overlap_correct(BBox::make(751, 0, 1000, 1000), BBox::make(0, 0, 1000, 1000)), "24.9% of gt");
  const auto small = BBox::make(10, 10, 30, 30);  // 9% of gt, 100% of itself
  c.expect(!overlap_correct(small, gt, 0.25, OverlapBasis::ground_truth), "asymmetric case, gt basis");
  c.expect(overlap_correct(small, gt, 0.25, OverlapBasis::output), "asymmetric case, output basis");

  Screen s;
  s.id = "s";
  s.width = 100;
  s.height = 100;
  s.graphics = {{"icon", BBox::make(0, 0, 10, 10), "cart", 1.0}, {"lone", BBox::make(50, 50, 10, 10), "bag", 1.0}};
  s.texts = {{"caption", BBox::make(10, 0, 20, 10), "Cart"}};
  s.button_groups = {{"btn", {"icon", "caption"}}};
  EvalCase ec;
  ec.id = "e";
  ec.gt_bbox = BBox::make(0, 0, 10, 10);
  c.expect(expand_ground_truth(ec, s) == BBox::make(0, 0, 30, 10), "union [0,0,10,10] + [10,0,20,10]");
  ec.gt_bbox = BBox::make(50, 50, 10, 10);
  c.expect(expand_ground_truth(ec, s) == BBox::make(50, 50, 10, 10), "ungrouped frame unchanged");
  ec.gt_bbox = BBox::make(12, 1, 15, 8);  // frame over the caption half
  c.expect(expand_ground_truth(ec, s) == BBox::make(0, 0, 30, 10), "caption frame widened to the group");
}

// ----- AC6 ------------------------------------------------------------------

void ac6_pipeline(Check& c) {
  const std::string dir = g_fixture_dir + "/pipeline";
  auto db = LexiconDb::ingest_file(dir + "/lexicon.tsv", LabelSet::defaults());
  auto screens = ScreenStore::load_directory(dir + "/screens", db.label_set());
  auto cases = load_dataset(dir + "/cases.jsonl");
  FixturePredictor predictor{std::filesystem::path(dir + "/predictor.json")};
  c.expect(cases.size() == 12, "12 cases");

  // Hand traces; 1 = correct.
  const std::map<SearchMode, std::vector<int>> traced{
      {SearchMode::full, {1, 1, 0, 1, 1, 1, 0, 1, 1, 1, 1, 0}},
      {SearchMode::cv_only, {1, 1, 0, 1, 0, 1, 0, 1, 1, 1, 0, 0}},
      {SearchMode::text_only, {0, 0, 0, 0, 1, 0, 1, 0, 0, 0, 1, 0}},
  };
  const std::map<SearchMode, double> accuracy{
      {SearchMode::full, 9.0 / 12}, {SearchMode::cv_only, 7.0 / 12}, {SearchMode::text_only, 3.0 / 12}};
  const char* names[] = {"full", "cv_only", "text_only"};

  std::set<std::string> negative_ids;
  for (const auto& id : screens.ids()) {
    for (const auto& g : screens.find(id)->graphics) {
      if (g.label == kNegativeLabel) negative_ids.insert(id + "/" + g.id);
    }
  }

  for (const auto& [mode, expected] : traced) {
    GroundingConfig cfg;
    cfg.mode = mode;
    auto outcomes = grade_cases(cases, screens, db, cfg, predictor, Seed{0}, OverlapRule{}, 1);
    int hits = 0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      hits += outcomes[i].correct;
      c.expect(outcomes[i].correct == (expected[i] == 1),
               std::string(names[static_cast<int>(mode)]) + " " + cases[i].id + " outcome differs from trace");
      c.expect(!outcomes[i].error, cases[i].id + " raised " + outcomes[i].error.value_or(""));
    }
    c.near(static_cast<double>(hits) / 12.0, accuracy.at(mode), 0.0, std::string(names[static_cast<int>(mode)]) + " accuracy");

    for (const auto& ec : cases) {
      auto r = ground(Intent(ec.intent), *screens.find(ec.screen_id), db, cfg, predictor, derive(Seed{0}, "case/" + ec.id));
      if (r.path != ResolutionPath::visual) continue;
      for (const auto& t : r.targets) {
        c.expect(!negative_ids.contains(ec.screen_id + "/" + t.element_id), ec.id + " targeted a negative element");
      }
    }
  }

  // Full evaluation agrees with the per-mode grading.
  EvalConfig ecfg;
  ecfg.trials = 100;
  auto report = evaluate(cases, screens, db, ecfg, predictor, Seed{0});
  c.near(report.accuracy.at(SplitFilter::all).accuracy().value_or(-1), 0.75, 0.0, "report accuracy");
  c.near(report.ablations.at("cv_only").at(SplitFilter::all).accuracy().value_or(-1), 7.0 / 12, 0.0, "report cv_only");
  c.near(report.ablations.at("text_only").at(SplitFilter::all).accuracy().value_or(-1), 3.0 / 12, 0.0,
         "report text_only");

  // Visual short-circuit: c06 ranks settings over user.  Adding another,
  // more confident user icon must not change the output.
  const auto& c06 = cases[5];
  Screen base = *screens.find(c06.screen_id);
  auto before = ground(Intent(c06.intent), base, db, GroundingConfig{}, predictor, Seed{6});
  auto labels = before.ranking.labels();
  c.expect(labels.size() >= 2 && labels[0] == "settings" && labels[1] == "user", "c06 ranking is [settings, user, ...]");
  Screen extra = base;
  extra.graphics.push_back({"g_user_extra", BBox::make(200, 400, 30, 30), "user", 1.0});
  auto after = ground(Intent(c06.intent), extra, db, GroundingConfig{}, predictor, Seed{6});
  c.expect(to_json(before).dump() == to_json(after).dump(), "lower-priority icon changed the output");
  c.expect(after.matched_label == std::optional<std::string>("settings"), "c06 matched settings");

  // c03 only votes negative: the banner is never chosen.
  auto c03 = ground(Intent(cases[2].intent), *screens.find("shop"), db, GroundingConfig{}, predictor, Seed{0});
  c.expect(!c03.ranking.empty() && c03.ranking.labels().front() == "negative", "c03 ranking head is negative");
  c.expect(c03.path == ResolutionPath::none, "c03 resolves to none");
}

// ----- AC7 ------------------------------------------------------------------

void ac7_baseline(Check& c) {
  Screen s;
  s.id = "s";
  s.width = 200;
  s.height = 100;
  s.graphics = {{"hit", BBox::make(0, 0, 20, 20), "cart", 1.0},
                {"m1", BBox::make(50, 0, 20, 20), "bag", 1.0},
                {"m2", BBox::make(100, 0, 20, 20), "star", 1.0}};
  s.texts = {{"m3", BBox::make(150, 0, 20, 20), "Menu"}};
  ScreenStore store;
  store.add(s);
  EvalCase ec;
  ec.id = "case";
  ec.screen_id = "s";
  ec.gt_bbox = BBox::make(0, 0, 20, 20);
  std::vector<EvalCase> cases{ec};

  const double sigma = std::sqrt(0.25 * 0.75 / 1000.0);
  double r1 = random_baseline(cases, store, 1, 1000, Seed{2024});
  c.near(r1, 0.25, 3 * sigma, "UIED_Random_1");
  double prev = 0.0;
  for (std::size_t x = 1; x <= 4; ++x) {
    double r = random_baseline(cases, store, x, 1000, Seed{2024});
    c.expect(r >= prev, "monotone at x=" + std::to_string(x));
    prev = r;
  }
  c.expect(prev == 1.0, "x=4 gives exactly 1.0");
  // Analytic hypergeometric values for x = 2, 3 are 0.5 and 0.75.
  c.near(random_baseline(cases, store, 2, 1000, Seed{2024}), 0.5, 3 * std::sqrt(0.25 / 1000.0), "UIED_Random_2");
  c.near(random_baseline(cases, store, 3, 1000, Seed{2024}), 0.75, 3 * sigma, "UIED_Random_3");
}

// ----- AC8 ------------------------------------------------------------------

void ac8_text_search(Check& c) {
  auto screen_with = [](std::vector<std::pair<std::string, std::string>> texts) {
    Screen s;
    s.id = "t";
    s.width = 400;
    s.height = 400;
    std::int64_t y = 0;
    for (auto& [id, content] : texts) {
      s.texts.push_back({id, BBox::make(0, y, 100, 20), content});
      y += 30;
    }
    return s;
  };
  auto head = [](const TokenSet& tokens, const Screen& s) -> std::string {
    auto hits = search_textual(tokens, s);
    return hits ? hits->front().element_id : "<none>";
  };
  auto tok = [](std::initializer_list<const char*> stems) {
    TokenSet t;
    for (auto s : stems) t.tokens.push_back({s, TokenSource::intent});
    return t;
  };

  // Distinct counting: repeats do not raise the score.
  auto s1 = screen_with({{"rep", "cart cart cart"}, {"two", "cart bag"}});
  auto hits = search_textual(tok({"cart", "bag"}), s1);
  c.expect(hits && hits->front().element_id == "two" && hits->front().score == 2 && (*hits)[1].score == 1,
           "distinct-token counting");

  // Stem matching.
  c.expect(head(tok({"save"}), screen_with({{"t", "Saved items"}})) == "t", "save/saved");
  c.expect(head(tok({"shop"}), screen_with({{"t", "Shopping list"}})) == "t", "shop/shopping");

  // Token set of the shopping example: 11 stems, stopwords removed.
  std::vector<DescriptiveWord> words{
      {1, "item", 0.217}, {2, "store", 0.0759}, {3, "shopping", 0.0497}, {4, "product", 0.0415}, {5, "purchase", 0.0374}};
  std::vector<std::string> labels{"cart", "bag", "dollar", "barcode"};
  auto tokens = build_tokens(Intent("I plan to add the item to the shopping cart"), words, labels,
                             StopwordSet::defaults());
  auto stems = tokens.stems();
  std::set<std::string> got(stems.begin(), stems.end());
  const std::set<std::string> want{"plan", "add",     "item", "shop",   "cart",  "store",
                                   "product", "purchas", "bag", "dollar", "barcod"};
  c.expect(stems.size() == 11 && got == want, "shopping token set " + join(stems));
  for (const char* sw : {"i", "to", "the"}) c.expect(!got.contains(sw), std::string("stopword kept: ") + sw);

  // Reading-order tiebreak and the cart/checkout head case.
  auto s2 = screen_with({{"go", "Go to checkout"}, {"view", "View cart and checkout"}, {"help", "Help"}});
  c.expect(head(tok({"cart", "checkout"}), s2) == "view", "cart/checkout head is 'View cart and checkout'");
  Screen s3;
  s3.id = "r";
  s3.width = 400;
  s3.height = 400;
  s3.texts = {{"low", BBox::make(0, 90, 50, 10), "cart"},
              {"right", BBox::make(200, 10, 50, 10), "cart"},
              {"left", BBox::make(10, 10, 50, 10), "cart"}};
  auto order = search_textual(tok({"cart"}), s3);
  c.expect(order && order->size() == 3 && (*order)[0].element_id == "left" && (*order)[1].element_id == "right" &&
               (*order)[2].element_id == "low",
           "tie broken by reading order");
}

// ----- AC9 ------------------------------------------------------------------

void ac9_service(Check& c) {
  const std::string dir = g_fixture_dir + "/pipeline";
  auto db = std::make_shared<const LexiconDb>(LexiconDb::ingest_file(dir + "/lexicon.tsv", LabelSet::defaults()));
  auto predictor = std::make_shared<FixturePredictor>(std::filesystem::path(dir + "/predictor.json"));
  GroundingService service(db, ScreenStore::load_directory(dir + "/screens", db->label_set()), GroundingConfig{},
                           predictor);
  httplib::Server server;
  service.mount(server);
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  const std::string bodies[] = {
      R"({"intent": "Open my shopping trolley", "screen_id": "shop", "seed": 11})",
      R"({"intent": "Change the privacy options", "screen_id": "settings", "seed": 12345678901})",
      R"({"intent": "Write a new memo", "screen_id": "notes", "seed": "5"})",
  };
  for (const auto& body : bodies) {
    auto a = client.Post("/ground", body, "application/json");
    auto b = client.Post("/ground", body, "application/json");
    c.expect(a && b && a->status == 200 && b->status == 200, "POST /ground succeeded");
    if (a && b) c.expect(a->body == b->body, "byte-identical responses for " + body);
  }
  auto stats = client.Get("/db/stats");
  c.expect(stats && json::parse(stats->body).at("pairs") == db->metadata().pair_total, "/db/stats pair total");
  server.stop();
  thread.join();
}

}  // namespace

int main(int argc, char** argv) {
  std::string only;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) only = argv[++i];
    else if (a == "--fixtures" && i + 1 < argc) g_fixture_dir = argv[++i];
  }

  const std::vector<Criterion> criteria{
      {"AC1", "voting arithmetic golden suite (tol 1e-4)", 1000, ac1_voting_arithmetic},
      {"AC2", "q-derivation from pair counts (tol 1e-5)", 1000, ac2_q_derivation},
      {"AC3", "deterministic agents and ranking vs exact-rational oracle (200 lexicons, exact)", 30000,
       ac3_oracle_equivalence},
      {"AC4", "random-agent replay, exhaustion and single-label properties (exact)", 10000, ac4_random_agents},
      {"AC5", "overlap metric truth table and ground-truth expansion (exact)", 1000, ac5_metric},
      {"AC6", "12-case pipeline fixture: 9/12 full, 7/12 cv_only, 3/12 text_only (exact)", 10000, ac6_pipeline},
      {"AC7", "UIED_Random_x statistics (3 sigma, sigma = sqrt(0.25*0.75/1000))", 5000, ac7_baseline},
      {"AC8", "text search: distinct counting, stems, stopwords, reading order (exact)", 1000, ac8_text_search},
      {"AC9", "service determinism over HTTP (byte-identical)", 5000, ac9_service},
  };

  int failed = 0;
  for (const auto& cr : criteria) {
    if (!only.empty() && only != cr.id) continue;
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      cr.body(check);
    } catch (const std::exception& e) {
      check.failures.push_back(std::string("exception: ") + e.what());
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (ms > cr.budget_ms) {
      check.failures.push_back("runtime " + std::to_string(ms) + " ms over budget");
    }
    const bool ok = check.failures.empty();
    failed += ok ? 0 : 1;
    std::printf("%s %s %s [%d checks, %.1f ms, budget %.0f ms]\n", ok ? "PASS" : "FAIL", cr.id, cr.title,
                check.checks, ms, cr.budget_ms);
    for (const auto& f : check.failures) std::printf("     - %s\n", f.c_str());
  }
  std::printf("%s: %d criteria failed\n", failed ? "FAILED" : "OK", failed);
  return failed ? 1 : 0;
}
