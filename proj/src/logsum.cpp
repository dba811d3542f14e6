#include "udsmc/logsum.hpp"

#include <algorithm>
#include <cmath>

namespace udsmc {

double log_sum_exp(std::span<const double> log_values) {
  double m = neg_inf;
  for (double v : log_values) m = std::max(m, v);
  if (m == neg_inf) return neg_inf;
  double s = 0.0;
  for (double v : log_values) {
    if (v != neg_inf) s += std::exp(v - m);
  }
  return m + std::log(s);
}

long positive_count(std::span<const double> log_values) {
  long n = 0;
  for (double v : log_values) {
    if (v != neg_inf) ++n;
  }
  return n;
}

double shifted_exp(std::span<const double> log_values, std::vector<double>& out) {
  double m = neg_inf;
  for (double v : log_values) m = std::max(m, v);
  out.resize(log_values.size());
  if (m == neg_inf) {
    std::fill(out.begin(), out.end(), 0.0);
    return m;
  }
  for (size_t i = 0; i < log_values.size(); ++i) {
    out[i] = log_values[i] == neg_inf ? 0.0 : std::exp(log_values[i] - m);
  }
  return m;
}

double weight_entropy(std::span<const double> log_values) {
  double lse = log_sum_exp(log_values);
  if (lse == neg_inf) return 0.0;
  double h = 0.0;
  for (double v : log_values) {
    if (v == neg_inf) continue;
    double lp = v - lse;
    h -= std::exp(lp) * lp;
  }
  return h;
}

}  // namespace udsmc
