#include "grounding/kernels.hpp"

#include <cstdint>
#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace grounding::kernels::omp {

namespace {

// Runs body(i) for every index; the first exception (lowest index) is
// rethrown after the loop since exceptions cannot cross the parallel region.
template <typename Body>
void parallel_for(std::size_t n, Body body) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

std::vector<CaseOutcome> grade_cases(std::span<const EvalCase> cases, const ScreenStore& screens, const LexiconDb& db,
                                     const GroundingConfig& cfg, const WordPredictor& predictor, Seed seed,
                                     const OverlapRule& rule, std::size_t top_k) {
  std::vector<CaseOutcome> out(cases.size());
  parallel_for(cases.size(), [&](std::size_t i) {
    out[i] = grade_case(cases[i], screens, db, cfg, predictor, seed, rule, top_k);
  });
  return out;
}

std::vector<char> coverage_flags(std::span<const EvalCase> cases, const ScreenStore& screens, const OverlapRule& rule) {
  std::vector<char> out(cases.size(), 0);
  parallel_for(cases.size(), [&](std::size_t i) { out[i] = case_covered(cases[i], screens, rule) ? 1 : 0; });
  return out;
}

std::vector<double> baseline_rates(std::span<const EvalCase> cases, const ScreenStore& screens, std::size_t x,
                                   std::size_t trials, Seed seed, const OverlapRule& rule) {
  std::vector<double> out(cases.size(), 0.0);
  parallel_for(cases.size(),
               [&](std::size_t i) { out[i] = case_baseline_rate(cases[i], screens, x, trials, seed, rule); });
  return out;
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace grounding::kernels::omp
