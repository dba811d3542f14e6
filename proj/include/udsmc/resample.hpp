#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "udsmc/rng.hpp"

namespace udsmc {

// Solution of sum_i min(c * w_i, 1) = n over nonnegative weights.
struct ThresholdSolution {
  double c = 0.0;       // weights with c * w_i >= 1 are kept unchanged
  long kept = 0;        // L = #{i : c * w_i >= 1}; ties at the boundary kept
  bool keep_all = false;  // exactly n positive weights; c = 1 / min positive
};

// Unique exact solution by a descending breakpoint scan over 1/w_i.
// Weights need not be normalized (c scales inversely with the weights).
// Requires at least n positive entries (too_few_positive otherwise);
// keep_all is reported when the positive count is exactly n.
ThresholdSolution solve_threshold(std::span<const double> weights, long n);

struct DownsampleOutcome {
  // Surviving candidate indices, ascending; duplicates only when
  // with_replacement. new_log_weights is parallel to selected, in the same
  // scale as the input log-weights.
  std::vector<int32_t> selected;
  std::vector<double> new_log_weights;
  // Per-candidate inclusion probability q_i = min(c * w_i, 1) for the
  // optimal scheme (audit hook); empty for the multinomial route.
  std::vector<double> inclusion_prob;
  // threshold.c applies to weights exp(lw - max lw).
  ThresholdSolution threshold;
  bool with_replacement = false;
};

// Optimal downsample to n survivors: keeps every candidate with
// c * w_i >= 1 at its exact weight and selects the rest without replacement
// with inclusion probability c * w_i (single-uniform systematic pass),
// assigning survivors weight 1/c. Minimizes conditional expected squared
// weight error among unbiased schemes. Requires >= n positive weights.
DownsampleOutcome optimal_downsample(std::span<const double> log_weights,
                                     long n, StreamRng& rng);

// With-replacement fallback used when fewer than n candidates carry weight:
// n independent draws proportional to weight; every survivor gets an equal
// share of the total mass. no_mass if all candidates are dead.
DownsampleOutcome multinomial_downsample(std::span<const double> log_weights,
                                         long n, StreamRng& rng);

enum class ResampleScheme { multinomial, stratified, residual };

// Parses "multinomial" | "stratified" | "residual" (invalid_argument else).
ResampleScheme resample_scheme_from_name(std::string_view name);
const char* resample_scheme_name(ResampleScheme s);

// n parent indices drawn from the weights (log scale), ascending.
// Post-resample weights are uniform by convention; callers assign them.
std::vector<int32_t> resample_indices(std::span<const double> log_weights,
                                      long n, ResampleScheme scheme,
                                      StreamRng& rng);

}  // namespace udsmc
