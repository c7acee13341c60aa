#include "grounding/kernels.hpp"

namespace grounding::kernels::serial {

std::vector<CaseOutcome> grade_cases(std::span<const EvalCase> cases, const ScreenStore& screens, const LexiconDb& db,
                                     const GroundingConfig& cfg, const WordPredictor& predictor, Seed seed,
                                     const OverlapRule& rule, std::size_t top_k) {
  std::vector<CaseOutcome> out;
  out.reserve(cases.size());
  for (const auto& c : cases) out.push_back(grade_case(c, screens, db, cfg, predictor, seed, rule, top_k));
  return out;
}

std::vector<char> coverage_flags(std::span<const EvalCase> cases, const ScreenStore& screens, const OverlapRule& rule) {
  std::vector<char> out;
  out.reserve(cases.size());
  for (const auto& c : cases) out.push_back(case_covered(c, screens, rule) ? 1 : 0);
  return out;
}

std::vector<double> baseline_rates(std::span<const EvalCase> cases, const ScreenStore& screens, std::size_t x,
                                   std::size_t trials, Seed seed, const OverlapRule& rule) {
  std::vector<double> out;
  out.reserve(cases.size());
  for (const auto& c : cases) out.push_back(case_baseline_rate(c, screens, x, trials, seed, rule));
  return out;
}

}  // namespace grounding::kernels::serial
