#pragma once

#include <limits>
#include <span>
#include <vector>

namespace udsmc {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

// log(sum(exp(x_i))); -inf for an empty or all-dead span.
double log_sum_exp(std::span<const double> log_values);

// Count of entries strictly above -inf (nonzero weights).
long positive_count(std::span<const double> log_values);

// exp(x_i - shift) for all i; shift chosen as max(x) and returned.
// All-dead input yields zeros with shift -inf.
double shifted_exp(std::span<const double> log_values, std::vector<double>& out);

// Entropy -sum(p log p) of the normalized weights, 0 log 0 := 0.
double weight_entropy(std::span<const double> log_values);

}  // namespace udsmc
