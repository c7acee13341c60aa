#pragma once

// Batch loops of the evaluation harness.  Each kernel exists twice: a plain
// serial loop kept as the reference, and an OpenMP version.  Both call the
// same per-case functions and derive every random stream from (seed, case,
// trial), so their outputs are identical element for element.

#include <span>
#include <vector>

#include "grounding/eval.hpp"

namespace grounding::kernels {

/// Per-case building blocks shared by both variants.
bool case_covered(const EvalCase& c, const ScreenStore& screens, const OverlapRule& rule);
double case_baseline_rate(const EvalCase& c, const ScreenStore& screens, std::size_t x, std::size_t trials,
                          Seed seed, const OverlapRule& rule);

namespace serial {

std::vector<CaseOutcome> grade_cases(std::span<const EvalCase> cases, const ScreenStore& screens, const LexiconDb& db,
                                     const GroundingConfig& cfg, const WordPredictor& predictor, Seed seed,
                                     const OverlapRule& rule, std::size_t top_k);
std::vector<char> coverage_flags(std::span<const EvalCase> cases, const ScreenStore& screens, const OverlapRule& rule);
std::vector<double> baseline_rates(std::span<const EvalCase> cases, const ScreenStore& screens, std::size_t x,
                                   std::size_t trials, Seed seed, const OverlapRule& rule);

}  // namespace serial

namespace omp {

std::vector<CaseOutcome> grade_cases(std::span<const EvalCase> cases, const ScreenStore& screens, const LexiconDb& db,
                                     const GroundingConfig& cfg, const WordPredictor& predictor, Seed seed,
                                     const OverlapRule& rule, std::size_t top_k);
std::vector<char> coverage_flags(std::span<const EvalCase> cases, const ScreenStore& screens, const OverlapRule& rule);
std::vector<double> baseline_rates(std::span<const EvalCase> cases, const ScreenStore& screens, std::size_t x,
                                   std::size_t trials, Seed seed, const OverlapRule& rule);

/// Threads OpenMP would use for the kernels above (1 without OpenMP).
int max_threads();

}  // namespace omp

}  // namespace grounding::kernels
