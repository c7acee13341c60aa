#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "grounding/grounding.hpp"
#include "grounding/lexicon_db.hpp"
#include "grounding/rng.hpp"
#include "grounding/screen.hpp"

namespace grounding {

enum class Split { original, mosaic };

/// One ground-truth intent.  `gt_bbox` is the raw frame drawn by the user;
/// it is widened to its composite button by expand_ground_truth.
struct EvalCase {
  std::string id;
  std::string intent;
  std::string screen_id;
  BBox gt_bbox;
  Split split = Split::original;
  std::optional<int> alignment;  // 0..3, mosaic cases only
  std::string notes;
};

/// JSON-lines, one case per line: {id, intent, screen, gt: [x,y,w,h], split,
/// alignment?, notes?}.  Blank lines are skipped.
std::vector<EvalCase> load_dataset(const std::filesystem::path& path);
std::vector<EvalCase> parse_dataset(std::istream& in, const std::string& source = "<dataset>");
EvalCase parse_case(const nlohmann::json& doc, const std::string& where);

enum class OverlapBasis { ground_truth, output };

struct OverlapRule {
  double threshold = 0.25;
  OverlapBasis basis = OverlapBasis::ground_truth;
};

/// True iff area(output ∩ gt) >= threshold * area(basis box).
bool overlap_correct(const BBox& output, const BBox& gt, double threshold = 0.25,
                     OverlapBasis basis = OverlapBasis::ground_truth);
inline bool overlap_correct(const BBox& output, const BBox& gt, const OverlapRule& rule) {
  return overlap_correct(output, gt, rule.threshold, rule.basis);
}

/// Widens the raw frame to the union box of the button group it sits on: the
/// group whose union box covers at least half of the frame (largest coverage
/// wins, declaration order breaks ties).  Otherwise the frame is unchanged.
BBox expand_ground_truth(const EvalCase& c, const Screen& screen);

/// Named case subsets used in reports.  Mosaic cases are positive when the
/// alignment rating is 2 or 3 and negative when it is 0 or 1.
enum class SplitFilter {
  original,
  mosaic_positive,
  mosaic_negative,
  mosaic,  // positive + negative
  original_plus_mosaic_positive,
  all,
};

inline constexpr SplitFilter kAllSplitFilters[] = {
    SplitFilter::original, SplitFilter::mosaic_positive, SplitFilter::mosaic_negative,
    SplitFilter::mosaic,   SplitFilter::original_plus_mosaic_positive, SplitFilter::all,
};

std::string_view to_string(SplitFilter f);
SplitFilter parse_split_filter(std::string_view name);
bool in_split(const EvalCase& c, SplitFilter f);

struct SplitStat {
  std::size_t cases = 0;
  double hits = 0.0;  // correct cases, or summed success rates for baselines

  std::optional<double> accuracy() const {
    if (cases == 0) return std::nullopt;
    return hits / static_cast<double>(cases);
  }
};

using SplitStats = std::map<SplitFilter, SplitStat>;

enum class ExecutionPolicy { serial, parallel };

struct CaseOutcome {
  std::string case_id;
  ResolutionPath path = ResolutionPath::none;
  bool correct = false;
  std::optional<BBox> output;  // first target consumed
  BBox ground_truth;           // expanded
  std::optional<std::string> error;

  friend bool operator==(const CaseOutcome&, const CaseOutcome&) = default;
};

/// Grades one case: ground it, then check the top `top_k` targets against
/// the expanded ground truth.  Errors become an incorrect outcome.
CaseOutcome grade_case(const EvalCase& c, const ScreenStore& screens, const LexiconDb& db, const GroundingConfig& cfg,
                       const WordPredictor& predictor, Seed seed, const OverlapRule& rule, std::size_t top_k);

std::vector<CaseOutcome> grade_cases(std::span<const EvalCase> cases, const ScreenStore& screens, const LexiconDb& db,
                                     const GroundingConfig& cfg, const WordPredictor& predictor, Seed seed,
                                     const OverlapRule& rule, std::size_t top_k,
                                     ExecutionPolicy policy = ExecutionPolicy::parallel);

/// Fraction of cases per split whose expanded ground truth is matched (same
/// overlap rule) by at least one detected element.
SplitStats coverage_ratio(std::span<const EvalCase> cases, const ScreenStore& screens, const OverlapRule& rule = {},
                          ExecutionPolicy policy = ExecutionPolicy::parallel);

/// Per-case success rate of UIED_Random_x: draw `x` distinct elements
/// uniformly per trial, succeed if any of them overlaps the ground truth.
std::vector<double> random_baseline_rates(std::span<const EvalCase> cases, const ScreenStore& screens, std::size_t x,
                                          std::size_t trials, Seed seed, const OverlapRule& rule = {},
                                          ExecutionPolicy policy = ExecutionPolicy::parallel);

/// Mean success rate of UIED_Random_x over all cases.
double random_baseline(std::span<const EvalCase> cases, const ScreenStore& screens, std::size_t x,
                       std::size_t trials, Seed seed, const OverlapRule& rule = {},
                       ExecutionPolicy policy = ExecutionPolicy::parallel);

SplitStats aggregate(std::span<const EvalCase> cases, std::span<const double> per_case_scores);

struct EvalConfig {
  GroundingConfig grounding;
  OverlapRule rule;
  std::size_t eval_top_k = 1;
  std::vector<SplitFilter> splits{std::begin(kAllSplitFilters), std::end(kAllSplitFilters)};
  bool ablate_cv_only = true;
  bool ablate_text_only = true;
  std::vector<std::size_t> baselines{1, 2, 3, 5};
  std::size_t trials = 1000;
  ExecutionPolicy policy = ExecutionPolicy::parallel;
};

struct EvalReport {
  SplitStats accuracy;
  std::map<std::string, SplitStats> ablations;  // "cv_only", "text_only"
  SplitStats coverage;
  std::map<std::size_t, SplitStats> baselines;  // x -> per-split mean success
  std::vector<CaseOutcome> outcomes;
  std::vector<SplitFilter> splits;
  Seed seed;
  nlohmann::json config;
};

EvalReport evaluate(std::span<const EvalCase> cases, const ScreenStore& screens, const LexiconDb& db,
                    const EvalConfig& cfg, const WordPredictor& predictor, Seed seed);

nlohmann::json to_json(const EvalReport& report);
/// Plain-text tables: accuracy by split with ablations, coverage, baselines.
std::string render_report(const EvalReport& report);

}  // namespace grounding
