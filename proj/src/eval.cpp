#include "grounding/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "grounding/error.hpp"
#include "grounding/kernels.hpp"
#include "grounding/text.hpp"

namespace grounding {

using nlohmann::json;

// ----- dataset ---------------------------------------------------------------

EvalCase parse_case(const json& doc, const std::string& where) {
  auto fail = [&](const std::string& msg) -> DatasetError { return DatasetError(where + ": " + msg); };
  if (!doc.is_object()) throw fail("expected object");
  auto str = [&](const char* key) {
    auto it = doc.find(key);
    if (it == doc.end() || !it->is_string()) throw fail(std::string("missing string field \"") + key + "\"");
    return it->get<std::string>();
  };
  EvalCase c;
  c.id = str("id");
  c.intent = std::string(trim(str("intent")));
  c.screen_id = str("screen");
  if (c.id.empty()) throw fail("empty case id");
  if (c.intent.empty()) throw fail("empty intent");

  auto gt = doc.find("gt");
  if (gt == doc.end() || !gt->is_array() || gt->size() != 4) throw fail("\"gt\" must be [x, y, w, h]");
  for (const auto& v : *gt) {
    if (!v.is_number_integer()) throw fail("\"gt\" coordinates must be integers");
  }
  auto w = (*gt)[2].get<std::int64_t>();
  auto h = (*gt)[3].get<std::int64_t>();
  if (w <= 0 || h <= 0) throw fail("\"gt\" extents must be positive");
  c.gt_bbox = BBox{(*gt)[0].get<std::int64_t>(), (*gt)[1].get<std::int64_t>(), w, h};

  auto split = str("split");
  if (split == "original") {
    c.split = Split::original;
  } else if (split == "mosaic") {
    c.split = Split::mosaic;
  } else {
    throw fail("split must be \"original\" or \"mosaic\", got \"" + split + "\"");
  }
  if (auto a = doc.find("alignment"); a != doc.end() && !a->is_null()) {
    if (!a->is_number_integer() || a->get<int>() < 0 || a->get<int>() > 3) throw fail("alignment must be 0..3");
    c.alignment = a->get<int>();
  }
  if (c.alignment.has_value() != (c.split == Split::mosaic)) {
    throw fail("alignment is required for mosaic cases and forbidden otherwise");
  }
  if (auto n = doc.find("notes"); n != doc.end() && n->is_string()) c.notes = n->get<std::string>();
  return c;
}

std::vector<EvalCase> parse_dataset(std::istream& in, const std::string& source) {
  std::vector<EvalCase> cases;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto where = source + ":" + std::to_string(lineno);
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DatasetError(where + ": invalid JSON: " + e.what());
    }
    cases.push_back(parse_case(doc, where));
  }
  std::vector<std::string> ids;
  for (const auto& c : cases) ids.push_back(c.id);
  std::sort(ids.begin(), ids.end());
  if (auto dup = std::adjacent_find(ids.begin(), ids.end()); dup != ids.end()) {
    throw DatasetError(source + ": duplicate case id " + *dup);
  }
  return cases;
}

std::vector<EvalCase> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open dataset " + path.string());
  return parse_dataset(in, path.string());
}

// ----- metric ----------------------------------------------------------------

bool overlap_correct(const BBox& output, const BBox& gt, double threshold, OverlapBasis basis) {
  const auto& base = basis == OverlapBasis::ground_truth ? gt : output;
  return static_cast<double>(intersection_area(output, gt)) >= threshold * static_cast<double>(base.area());
}

BBox expand_ground_truth(const EvalCase& c, const Screen& screen) {
  const BBox& frame = c.gt_bbox;
  std::optional<BBox> best;
  std::int64_t best_cover = 0;
  for (const auto& group : screen.button_groups) {
    std::optional<BBox> u;
    for (const auto& id : group.members) {
      auto b = screen.bbox_of(id);
      if (!b) throw DatasetError("button group " + group.id + " references unknown element " + id);
      u = u ? bbox_union(*u, *b) : *b;
    }
    if (!u) continue;
    auto cover = intersection_area(frame, *u);
    if (2 * cover >= frame.area() && cover > best_cover) {
      best = u;
      best_cover = cover;
    }
  }
  return best ? *best : frame;
}

// ----- splits ----------------------------------------------------------------

std::string_view to_string(SplitFilter f) {
  switch (f) {
    case SplitFilter::original: return "original";
    case SplitFilter::mosaic_positive: return "mosaic_positive";
    case SplitFilter::mosaic_negative: return "mosaic_negative";
    case SplitFilter::mosaic: return "mosaic_positive+mosaic_negative";
    case SplitFilter::original_plus_mosaic_positive: return "original+mosaic_positive";
    case SplitFilter::all: return "all";
  }
  return "all";
}

SplitFilter parse_split_filter(std::string_view name) {
  for (auto f : kAllSplitFilters) {
    if (to_string(f) == name) return f;
  }
  if (name == "mosaic") return SplitFilter::mosaic;
  throw Error("unknown split \"" + std::string(name) + "\"");
}

bool in_split(const EvalCase& c, SplitFilter f) {
  const bool original = c.split == Split::original;
  const bool positive = !original && c.alignment && *c.alignment >= 2;
  const bool negative = !original && c.alignment && *c.alignment <= 1;
  switch (f) {
    case SplitFilter::original: return original;
    case SplitFilter::mosaic_positive: return positive;
    case SplitFilter::mosaic_negative: return negative;
    case SplitFilter::mosaic: return positive || negative;
    case SplitFilter::original_plus_mosaic_positive: return original || positive;
    case SplitFilter::all: return true;
  }
  return false;
}

SplitStats aggregate(std::span<const EvalCase> cases, std::span<const double> per_case_scores) {
  SplitStats stats;
  for (auto f : kAllSplitFilters) stats[f];
  for (std::size_t i = 0; i < cases.size(); ++i) {
    for (auto f : kAllSplitFilters) {
      if (!in_split(cases[i], f)) continue;
      auto& s = stats[f];
      ++s.cases;
      s.hits += per_case_scores[i];
    }
  }
  return stats;
}

// ----- per-case kernels ------------------------------------------------------

namespace {

const Screen& require_screen(const EvalCase& c, const ScreenStore& screens) {
  const Screen* s = screens.find(c.screen_id);
  if (!s) throw DatasetError("case " + c.id + ": unknown screen " + c.screen_id);
  return *s;
}

void check_within(const EvalCase& c, const Screen& s, const BBox& gt) {
  if (gt.x < 0 || gt.y < 0 || gt.right() > s.width || gt.bottom() > s.height) {
    throw DatasetError("case " + c.id + ": ground truth lies outside screen " + s.id);
  }
}

}  // namespace

CaseOutcome grade_case(const EvalCase& c, const ScreenStore& screens, const LexiconDb& db, const GroundingConfig& cfg,
                       const WordPredictor& predictor, Seed seed, const OverlapRule& rule, std::size_t top_k) {
  CaseOutcome out;
  out.case_id = c.id;
  out.ground_truth = c.gt_bbox;
  try {
    const Screen& screen = require_screen(c, screens);
    out.ground_truth = expand_ground_truth(c, screen);
    check_within(c, screen, out.ground_truth);
    auto result = ground(Intent(c.intent), screen, db, cfg, predictor, derive(seed, "case/" + c.id));
    out.path = result.path;
    if (!result.targets.empty()) out.output = result.targets.front().bbox;
    const std::size_t n = std::min(top_k, result.targets.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (overlap_correct(result.targets[i].bbox, out.ground_truth, rule)) {
        out.correct = true;
        break;
      }
    }
  } catch (const std::exception& e) {
    out.correct = false;
    out.path = ResolutionPath::none;
    out.error = e.what();
  }
  return out;
}

namespace kernels {

bool case_covered(const EvalCase& c, const ScreenStore& screens, const OverlapRule& rule) {
  const Screen& screen = require_screen(c, screens);
  auto gt = expand_ground_truth(c, screen);
  for (const auto& b : screen.element_boxes()) {
    if (overlap_correct(b, gt, rule)) return true;
  }
  return false;
}

double case_baseline_rate(const EvalCase& c, const ScreenStore& screens, std::size_t x, std::size_t trials,
                          Seed seed, const OverlapRule& rule) {
  if (x == 0) throw std::invalid_argument("baseline selection count must be positive");
  if (trials == 0) throw std::invalid_argument("baseline trials must be positive");
  const Screen& screen = require_screen(c, screens);
  auto gt = expand_ground_truth(c, screen);
  auto boxes = screen.element_boxes();
  std::vector<char> covers(boxes.size());
  bool any = false;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    covers[i] = overlap_correct(boxes[i], gt, rule) ? 1 : 0;
    any = any || covers[i];
  }
  if (!any) return 0.0;
  if (x >= boxes.size()) return 1.0;

  const Seed case_seed = derive(seed, "baseline/" + std::to_string(x) + "/" + c.id);
  std::vector<std::size_t> order(boxes.size());
  std::size_t successes = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(derive(case_seed, static_cast<std::uint64_t>(t)));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    bool hit = false;
    for (std::size_t i = 0; i < x; ++i) {
      std::size_t j = i + static_cast<std::size_t>(rng.uniform_below(order.size() - i));
      std::swap(order[i], order[j]);
      if (covers[order[i]]) {
        hit = true;
        break;
      }
    }
    successes += hit ? 1 : 0;
  }
  return static_cast<double>(successes) / static_cast<double>(trials);
}

}  // namespace kernels

std::vector<CaseOutcome> grade_cases(std::span<const EvalCase> cases, const ScreenStore& screens, const LexiconDb& db,
                                     const GroundingConfig& cfg, const WordPredictor& predictor, Seed seed,
                                     const OverlapRule& rule, std::size_t top_k, ExecutionPolicy policy) {
  if (policy == ExecutionPolicy::serial) {
    return kernels::serial::grade_cases(cases, screens, db, cfg, predictor, seed, rule, top_k);
  }
  return kernels::omp::grade_cases(cases, screens, db, cfg, predictor, seed, rule, top_k);
}

SplitStats coverage_ratio(std::span<const EvalCase> cases, const ScreenStore& screens, const OverlapRule& rule,
                          ExecutionPolicy policy) {
  auto flags = policy == ExecutionPolicy::serial ? kernels::serial::coverage_flags(cases, screens, rule)
                                                 : kernels::omp::coverage_flags(cases, screens, rule);
  std::vector<double> scores(flags.begin(), flags.end());
  return aggregate(cases, scores);
}

std::vector<double> random_baseline_rates(std::span<const EvalCase> cases, const ScreenStore& screens, std::size_t x,
                                          std::size_t trials, Seed seed, const OverlapRule& rule,
                                          ExecutionPolicy policy) {
  if (policy == ExecutionPolicy::serial) return kernels::serial::baseline_rates(cases, screens, x, trials, seed, rule);
  return kernels::omp::baseline_rates(cases, screens, x, trials, seed, rule);
}

double random_baseline(std::span<const EvalCase> cases, const ScreenStore& screens, std::size_t x, std::size_t trials,
                       Seed seed, const OverlapRule& rule, ExecutionPolicy policy) {
  if (cases.empty()) return 0.0;
  auto rates = random_baseline_rates(cases, screens, x, trials, seed, rule, policy);
  double sum = 0.0;
  for (double r : rates) sum += r;
  return sum / static_cast<double>(rates.size());
}

// ----- full evaluation -------------------------------------------------------

namespace {

std::string_view to_string(SearchMode m) {
  switch (m) {
    case SearchMode::full: return "full";
    case SearchMode::cv_only: return "cv_only";
    case SearchMode::text_only: return "text_only";
  }
  return "full";
}

SplitStats score_outcomes(std::span<const EvalCase> cases, const std::vector<CaseOutcome>& outcomes) {
  std::vector<double> scores;
  scores.reserve(outcomes.size());
  for (const auto& o : outcomes) scores.push_back(o.correct ? 1.0 : 0.0);
  return aggregate(cases, scores);
}

json split_json(const SplitStats& stats, const std::vector<SplitFilter>& splits) {
  json out = json::object();
  for (auto f : splits) {
    const auto& s = stats.at(f);
    auto acc = s.accuracy();
    out[std::string(to_string(f))] = {
        {"cases", s.cases}, {"correct", s.hits}, {"accuracy", acc ? json(*acc) : json(nullptr)}};
  }
  return out;
}

json bbox_json(const BBox& b) { return json::array({b.x, b.y, b.w, b.h}); }

}  // namespace

EvalReport evaluate(std::span<const EvalCase> cases, const ScreenStore& screens, const LexiconDb& db,
                    const EvalConfig& cfg, const WordPredictor& predictor, Seed seed) {
  EvalReport report;
  report.seed = seed;
  report.splits = cfg.splits;
  report.outcomes =
      grade_cases(cases, screens, db, cfg.grounding, predictor, seed, cfg.rule, cfg.eval_top_k, cfg.policy);
  report.accuracy = score_outcomes(cases, report.outcomes);

  auto run_ablation = [&](SearchMode mode) {
    GroundingConfig g = cfg.grounding;
    g.mode = mode;
    auto outcomes = grade_cases(cases, screens, db, g, predictor, seed, cfg.rule, cfg.eval_top_k, cfg.policy);
    report.ablations[std::string(to_string(mode))] = score_outcomes(cases, outcomes);
  };
  if (cfg.ablate_cv_only) run_ablation(SearchMode::cv_only);
  if (cfg.ablate_text_only) run_ablation(SearchMode::text_only);

  // Cases whose screen is missing are reported through outcomes; coverage
  // and baselines only consider resolvable cases.
  std::vector<EvalCase> resolvable;
  for (const auto& c : cases) {
    if (screens.find(c.screen_id)) resolvable.push_back(c);
  }
  report.coverage = coverage_ratio(resolvable, screens, cfg.rule, cfg.policy);
  for (auto x : cfg.baselines) {
    auto rates = random_baseline_rates(resolvable, screens, x, cfg.trials, seed, cfg.rule, cfg.policy);
    report.baselines[x] = aggregate(resolvable, rates);
  }

  json baselines = json::array();
  for (auto x : cfg.baselines) baselines.push_back(x);
  json splits = json::array();
  for (auto f : cfg.splits) splits.push_back(to_string(f));
  report.config = {
      {"mode", to_string(cfg.grounding.mode)},
      {"threshold", cfg.rule.threshold},
      {"basis", cfg.rule.basis == OverlapBasis::ground_truth ? "ground_truth" : "output"},
      {"eval_top_k", cfg.eval_top_k},
      {"top_k_words", cfg.grounding.predictor.k},
      {"template_suffix", cfg.grounding.predictor.template_suffix},
      {"baselines", std::move(baselines)},
      {"trials", cfg.trials},
      {"splits", std::move(splits)},
      {"cases", cases.size()},
  };
  return report;
}

json to_json(const EvalReport& r) {
  json out;
  out["seed"] = r.seed.value;
  out["config"] = r.config;
  out["accuracy"] = split_json(r.accuracy, r.splits);
  json ablations = json::object();
  for (const auto& [name, stats] : r.ablations) ablations[name] = split_json(stats, r.splits);
  out["ablations"] = std::move(ablations);
  out["coverage"] = split_json(r.coverage, r.splits);
  json baselines = json::object();
  for (const auto& [x, stats] : r.baselines) {
    json per_split = json::object();
    for (auto f : r.splits) {
      auto acc = stats.at(f).accuracy();
      per_split[std::string(to_string(f))] = acc ? json(*acc) : json(nullptr);
    }
    baselines["UIED_Random_" + std::to_string(x)] = {{"x", x}, {"accuracy", std::move(per_split)}};
  }
  out["baselines"] = std::move(baselines);
  json cases = json::array();
  for (const auto& o : r.outcomes) {
    json c = {{"id", o.case_id},
              {"path", to_string(o.path)},
              {"correct", o.correct},
              {"ground_truth", bbox_json(o.ground_truth)}};
    c["output"] = o.output ? bbox_json(*o.output) : json(nullptr);
    if (o.error) c["error"] = *o.error;
    cases.push_back(std::move(c));
  }
  out["cases"] = std::move(cases);
  // Results published for the original 752-intent study; they need that
  // dataset and its trained models, so they are carried for comparison only.
  out["reference_targets"] = {
      {"accuracy", {{"original", 0.6443}, {"original+mosaic_positive", 0.5856}}},
      {"cv_only", {{"original", 0.3211}, {"original+mosaic_positive", 0.3312}}},
      {"text_only", {{"original", 0.4878}, {"original+mosaic_positive", 0.3815}}},
      {"coverage", {{"original", 0.7785}, {"mosaic_positive", 0.7473}, {"all", 0.7267}}},
  };
  return out;
}

namespace {

std::string pct(const SplitStat& s) {
  auto acc = s.accuracy();
  if (!acc) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", *acc * 100.0);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

std::string render_report(const EvalReport& r) {
  std::ostringstream os;
  std::vector<std::pair<std::string, const SplitStats*>> columns = {{"model", &r.accuracy}};
  for (const auto& [name, stats] : r.ablations) columns.emplace_back(name, &stats);
  columns.emplace_back("coverage", &r.coverage);

  os << "Accuracy by split (seed " << r.seed.value << ")\n";
  os << pad("split", 34) << pad("cases", 8);
  for (const auto& [name, _] : columns) os << pad(name, 12);
  os << "\n";
  for (auto f : r.splits) {
    os << pad(std::string(to_string(f)), 34) << pad(std::to_string(r.accuracy.at(f).cases), 8);
    for (const auto& [_, stats] : columns) os << pad(pct(stats->at(f)), 12);
    os << "\n";
  }
  if (!r.baselines.empty()) {
    os << "\nUIED_Random_x baselines\n" << pad("split", 34);
    for (const auto& [x, _] : r.baselines) os << pad("x=" + std::to_string(x), 12);
    os << "\n";
    for (auto f : r.splits) {
      os << pad(std::string(to_string(f)), 34);
      for (const auto& [_, stats] : r.baselines) os << pad(pct(stats.at(f)), 12);
      os << "\n";
    }
  }
  std::size_t errors = 0;
  for (const auto& o : r.outcomes) errors += o.error ? 1 : 0;
  if (errors) os << "\n" << errors << " case(s) failed with errors (counted as incorrect)\n";
  return os.str();
}

}  // namespace grounding
