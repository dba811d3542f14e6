#include "udsmc/resample.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "udsmc/errors.hpp"
#include "udsmc/logsum.hpp"

namespace udsmc {

namespace {

// n ascending index draws proportional to linear weights (sum > 0).
std::vector<int32_t> multinomial_indices(std::span<const double> w, double total,
                                         long n, StreamRng& rng) {
  std::vector<double> u((size_t)n);
  for (auto& x : u) x = rng.uniform() * total;
  std::sort(u.begin(), u.end());
  std::vector<int32_t> idx;
  idx.reserve((size_t)n);
  double cum = 0.0;
  size_t k = 0;
  for (size_t i = 0; i < w.size() && k < u.size(); ++i) {
    cum += w[i];
    while (k < u.size() && u[k] < cum) {
      idx.push_back((int32_t)i);
      ++k;
    }
  }
  // Rounding at the upper edge: remaining draws land on the last positive.
  if (k < u.size()) {
    int32_t last = 0;
    for (size_t i = w.size(); i-- > 0;) {
      if (w[i] > 0.0) {
        last = (int32_t)i;
        break;
      }
    }
    while (k++ < u.size()) idx.push_back(last);
  }
  return idx;
}

}  // namespace

ThresholdSolution solve_threshold(std::span<const double> weights, long n) {
  require(n >= 1, errc::invalid_argument, "threshold: n must be >= 1");
  std::vector<double> pos;
  pos.reserve(weights.size());
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      fail(errc::invalid_argument, "threshold: weights must be finite and >= 0");
    if (w > 0.0) pos.push_back(w);
  }
  long p = (long)pos.size();
  if (p < n)
    fail(errc::too_few_positive,
         "threshold: " + std::to_string(p) + " positive weights < n = " +
             std::to_string(n));

  ThresholdSolution sol;
  if (p == n) {
    double wmin = pos[0];
    for (double w : pos) wmin = std::min(wmin, w);
    sol.c = 1.0 / wmin;
    sol.kept = n;
    sol.keep_all = true;
    return sol;
  }

  // Sort only the n largest: the kept count L is < n whenever p > n, so the
  // scan never looks past index n-1.
  std::nth_element(pos.begin(), pos.begin() + (size_t)n, pos.end(),
                   std::greater<double>());
  std::sort(pos.begin(), pos.begin() + (size_t)n, std::greater<double>());

  double tail = 0.0;  // sum of everything below the top n
  for (size_t i = (size_t)n; i < pos.size(); ++i) tail += pos[i];

  // suffix[j] = sum of all positive weights excluding the j largest,
  // accumulated smallest-first so no cancellation occurs.
  std::vector<double> suffix((size_t)n + 1);
  suffix[(size_t)n] = tail;
  for (long j = n - 1; j >= 0; --j)
    suffix[(size_t)j] = suffix[(size_t)j + 1] + pos[(size_t)j];

  // On [1/w_(j), 1/w_(j+1)) the identity reads j + c * suffix[j] = n.
  // Boundary ties (c * w == 1) are pushed into the kept set by the strict
  // second test; the scan then lands on an equivalent larger-j segment.
  for (long j = 0; j < n; ++j) {
    double c = (double)(n - j) / suffix[(size_t)j];
    bool lower_ok = (j == 0) || (c * pos[(size_t)j - 1] >= 1.0);
    bool upper_ok = c * pos[(size_t)j] < 1.0;
    if (lower_ok && upper_ok) {
      sol.c = c;
      sol.kept = j;
      return sol;
    }
  }
  fail(errc::internal, "threshold scan found no valid segment");
}

DownsampleOutcome optimal_downsample(std::span<const double> log_weights,
                                     long n, StreamRng& rng) {
  long k = (long)log_weights.size();
  require(n >= 1 && n <= k, errc::invalid_argument,
          "optimal downsample: need 1 <= n <= candidate count");
  std::vector<double> w;
  double shift = shifted_exp(log_weights, w);
  long p = positive_count(log_weights);
  if (p < n)
    fail(errc::too_few_positive,
         "optimal downsample: " + std::to_string(p) +
             " positive candidates < n = " + std::to_string(n));

  DownsampleOutcome out;
  out.selected.reserve((size_t)n);
  out.new_log_weights.reserve((size_t)n);
  out.inclusion_prob.assign((size_t)k, 0.0);

  if (p == n) {
    double wmin = 0.0;
    for (long i = 0; i < k; ++i) {
      if (w[(size_t)i] > 0.0) {
        out.selected.push_back((int32_t)i);
        out.new_log_weights.push_back(log_weights[(size_t)i]);
        out.inclusion_prob[(size_t)i] = 1.0;
        wmin = wmin == 0.0 ? w[(size_t)i] : std::min(wmin, w[(size_t)i]);
      }
    }
    out.threshold = {1.0 / wmin, n, true};
    return out;
  }

  out.threshold = solve_threshold(w, n);
  double c = out.threshold.c;
  double new_lw = shift - std::log(c);

  // One ascending pass decides both branches: kept candidates (q = 1) pass
  // through unchanged; the rest are hit by the systematic targets u, u+1, ...
  // Each residual interval has q < 1, so no candidate is taken twice and the
  // inclusion probability is exactly q_i.
  double target = rng.uniform();
  double cum = 0.0;
  long kept = 0;
  int32_t last_residual_positive = -1;
  std::vector<int32_t> residual_selected;
  for (long i = 0; i < k; ++i) {
    double q = std::min(c * w[(size_t)i], 1.0);
    out.inclusion_prob[(size_t)i] = q;
    if (q >= 1.0) {
      out.selected.push_back((int32_t)i);
      out.new_log_weights.push_back(log_weights[(size_t)i]);
      ++kept;
    } else if (q > 0.0) {
      last_residual_positive = (int32_t)i;
      cum += q;
      if (cum > target) {
        out.selected.push_back((int32_t)i);
        out.new_log_weights.push_back(new_lw);
        residual_selected.push_back((int32_t)i);
        target += 1.0;
      }
    }
  }
  // The residual q sum to n - kept exactly in real arithmetic; guard the
  // final target against rounding just below the last interval edge.
  if ((long)out.selected.size() < n && last_residual_positive >= 0 &&
      (residual_selected.empty() ||
       residual_selected.back() != last_residual_positive)) {
    out.selected.push_back(last_residual_positive);
    out.new_log_weights.push_back(new_lw);
  }
  require((long)out.selected.size() == n, errc::internal,
          "optimal downsample: selection count mismatch");
  return out;
}

DownsampleOutcome multinomial_downsample(std::span<const double> log_weights,
                                         long n, StreamRng& rng) {
  require(n >= 1, errc::invalid_argument, "multinomial downsample: n >= 1");
  std::vector<double> w;
  double shift = shifted_exp(log_weights, w);
  if (shift == neg_inf)
    fail(errc::no_mass, "multinomial downsample: all candidates dead");
  double total = 0.0;
  for (double x : w) total += x;

  DownsampleOutcome out;
  out.with_replacement = true;
  out.selected = multinomial_indices(w, total, n, rng);
  // Equal share of the total mass keeps the population properly weighted.
  double lw = shift + std::log(total) - std::log((double)n);
  out.new_log_weights.assign((size_t)n, lw);
  return out;
}

ResampleScheme resample_scheme_from_name(std::string_view name) {
  if (name == "multinomial") return ResampleScheme::multinomial;
  if (name == "stratified") return ResampleScheme::stratified;
  if (name == "residual") return ResampleScheme::residual;
  fail(errc::invalid_argument,
       "unknown resample scheme: " + std::string(name));
}

const char* resample_scheme_name(ResampleScheme s) {
  switch (s) {
    case ResampleScheme::multinomial: return "multinomial";
    case ResampleScheme::stratified: return "stratified";
    case ResampleScheme::residual: return "residual";
  }
  return "?";
}

std::vector<int32_t> resample_indices(std::span<const double> log_weights,
                                      long n, ResampleScheme scheme,
                                      StreamRng& rng) {
  require(n >= 1, errc::invalid_argument, "resample: n >= 1");
  std::vector<double> w;
  double shift = shifted_exp(log_weights, w);
  if (shift == neg_inf) fail(errc::no_mass, "resample: all weights dead");
  double total = 0.0;
  for (double x : w) total += x;

  switch (scheme) {
    case ResampleScheme::multinomial:
      return multinomial_indices(w, total, n, rng);

    case ResampleScheme::stratified: {
      // One uniform per stratum [k/n, (k+1)/n); output is ascending by
      // construction. Uniform weights map stratum k to index k exactly.
      std::vector<int32_t> idx;
      idx.reserve((size_t)n);
      double cum = 0.0;
      size_t i = 0;
      for (long s = 0; s < n; ++s) {
        double u = ((double)s + rng.uniform()) / (double)n * total;
        while (i < w.size() && cum + w[i] <= u) cum += w[i++];
        if (i >= w.size()) {  // rounding at the top edge
          for (size_t j = w.size(); j-- > 0;) {
            if (w[j] > 0.0) {
              idx.push_back((int32_t)j);
              break;
            }
          }
        } else {
          idx.push_back((int32_t)i);
        }
      }
      return idx;
    }

    case ResampleScheme::residual: {
      // floor(n * p_i) deterministic copies, remainder multinomial on the
      // fractional parts.
      std::vector<int32_t> idx;
      idx.reserve((size_t)n);
      std::vector<double> frac(w.size(), 0.0);
      long assigned = 0;
      for (size_t i = 0; i < w.size(); ++i) {
        double expect = (double)n * (w[i] / total);
        double fl = std::floor(expect);
        long copies = (long)fl;
        for (long cnt = 0; cnt < copies; ++cnt) idx.push_back((int32_t)i);
        assigned += copies;
        frac[i] = expect - fl;
      }
      long rest = n - assigned;
      if (rest > 0) {
        double frac_total = 0.0;
        for (double x : frac) frac_total += x;
        auto extra = multinomial_indices(frac, frac_total, rest, rng);
        idx.insert(idx.end(), extra.begin(), extra.end());
      }
      std::sort(idx.begin(), idx.end());
      return idx;
    }
  }
  fail(errc::internal, "unreachable resample scheme");
}

}  // namespace udsmc
