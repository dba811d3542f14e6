#include "udsmc/toy_models.hpp"

#include <algorithm>
#include <cmath>

#include "udsmc/errors.hpp"

namespace udsmc {

std::vector<double> enumerate_exact(const EnumerableModel& model,
                                    const Statistic& f, long long max_paths) {
  long s = model.n_states();
  int t_max = model.horizon();
  require(s >= 1, errc::invalid_argument, "enumerate: empty state space");

  long long total = 1;
  for (int t = 0; t <= t_max; ++t) {
    total *= s;
    if (total > max_paths)
      fail(errc::too_large, "enumerate: |X|^(T+1) exceeds " +
                                std::to_string(max_paths) + " paths");
  }

  size_t len = (size_t)t_max + 1;
  std::vector<double> path(len, model.state_value(0));
  std::vector<long> odo(len, 0);
  std::vector<double> fx((size_t)f.dim(), 0.0);
  std::vector<double> num((size_t)f.dim(), 0.0);
  double den = 0.0;
  double best = neg_inf;  // running max of log mass; sums stay rescaled

  for (long long p = 0; p < total; ++p) {
    double lm = model.log_mass(path);
    if (lm != neg_inf) {
      if (lm > best) {
        double scale = best == neg_inf ? 0.0 : std::exp(best - lm);
        den *= scale;
        for (auto& x : num) x *= scale;
        best = lm;
      }
      double w = std::exp(lm - best);
      f.eval(path, fx);
      den += w;
      for (size_t j = 0; j < fx.size(); ++j) num[j] += w * fx[j];
    }
    // odometer increment over state indices; paths hold embedded values
    for (size_t d = 0; d < len; ++d) {
      if (++odo[d] < s) {
        path[d] = model.state_value(odo[d]);
        break;
      }
      odo[d] = 0;
      path[d] = model.state_value(0);
    }
  }
  if (den == 0.0) fail(errc::no_mass, "enumerate: target has zero total mass");
  for (auto& x : num) x /= den;
  return num;
}

namespace {

std::vector<double> cumsum_checked(std::span<const double> p, long rows,
                                   long cols, const char* what) {
  std::vector<double> cum((size_t)rows * (size_t)cols);
  for (long r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (long c = 0; c < cols; ++c) {
      double v = p[(size_t)(r * cols + c)];
      require(v >= 0.0 && std::isfinite(v), errc::invalid_argument,
              std::string(what) + ": probabilities must be finite and >= 0");
      acc += v;
      cum[(size_t)(r * cols + c)] = acc;
    }
    require(std::abs(acc - 1.0) <= 1e-9, errc::bad_normalization,
            std::string(what) + ": row must sum to 1");
    cum[(size_t)(r * cols + cols - 1)] = 1.0;  // close the top edge exactly
  }
  return cum;
}

long pick(std::span<const double> cum_row, double u) {
  // first index with cum > u; u in [0,1)
  for (size_t i = 0; i < cum_row.size(); ++i) {
    if (u < cum_row[i]) return (long)i;
  }
  return (long)cum_row.size() - 1;
}

}  // namespace

FiniteHmm::FiniteHmm(Tables t) : t_(std::move(t)) {
  long s = t_.states;
  require(s >= 1 && t_.horizon >= 0, errc::invalid_argument,
          "hmm: need states >= 1, horizon >= 0");
  require((long)t_.init_target.size() == s &&
              (long)t_.init_proposal.size() == s &&
              (long)t_.trans_target.size() == s * s &&
              (long)t_.trans_proposal.size() == s * s,
          errc::bad_dimension, "hmm: table sizes must match state count");
  if (t_.state_values.empty()) {
    t_.state_values.resize((size_t)s);
    for (long k = 0; k < s; ++k) t_.state_values[(size_t)k] = (double)k;
  }
  require((long)t_.state_values.size() == s, errc::bad_dimension,
          "hmm: state_values size mismatch");
  for (long a = 0; a < s; ++a) {
    require(std::isfinite(t_.state_values[(size_t)a]), errc::invalid_argument,
            "hmm: state_values must be finite");
    for (long b = a + 1; b < s; ++b)
      require(t_.state_values[(size_t)a] != t_.state_values[(size_t)b],
              errc::invalid_argument,
              "hmm: state_values must be distinct (paths store them)");
  }
  for (double g : t_.init_target)
    require(g >= 0.0 && std::isfinite(g), errc::invalid_argument,
            "hmm: target potentials must be finite and >= 0");
  for (double g : t_.trans_target)
    require(g >= 0.0 && std::isfinite(g), errc::invalid_argument,
            "hmm: target potentials must be finite and >= 0");
  init_cum_ = cumsum_checked(t_.init_proposal, 1, s, "hmm initial proposal");
  trans_cum_ = cumsum_checked(t_.trans_proposal, s, s, "hmm transition proposal");
  // The proposal must cover the target's support or weights are undefined.
  for (long k = 0; k < s; ++k)
    require(!(t_.init_target[(size_t)k] > 0.0 &&
              t_.init_proposal[(size_t)k] == 0.0),
            errc::invalid_argument, "hmm: proposal must cover target support");
  for (long i = 0; i < s * s; ++i)
    require(!(t_.trans_target[(size_t)i] > 0.0 &&
              t_.trans_proposal[(size_t)i] == 0.0),
            errc::invalid_argument, "hmm: proposal must cover target support");
}

FiniteHmm FiniteHmm::propriety_reference() {
  Tables t;
  t.states = 3;
  t.horizon = 4;
  t.init_target = {1.0, 0.6, 0.4};
  t.init_proposal = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  t.trans_target = {0.9, 0.4, 0.1, 0.3, 1.0, 0.5, 0.2, 0.6, 1.2};
  t.trans_proposal.assign(9, 1.0 / 3);
  return FiniteHmm(std::move(t));
}

long FiniteHmm::index_of(double value) const {
  // Exact match: paths only ever hold values copied out of the table.
  for (long k = 0; k < t_.states; ++k)
    if (t_.state_values[(size_t)k] == value) return k;
  fail(errc::invalid_argument, "hmm: state value not in the embedding");
}

void FiniteHmm::propose(std::span<const double> prefix, int t, StreamRng& rng,
                        std::span<double> out_state) const {
  double u = rng.uniform();
  long k;
  if (t == 0) {
    k = pick(init_cum_, u);
  } else {
    long prev = index_of(prefix[prefix.size() - 1]);
    k = pick({trans_cum_.data() + (size_t)(prev * t_.states),
              (size_t)t_.states},
             u);
  }
  out_state[0] = t_.state_values[(size_t)k];
}

double FiniteHmm::log_increment(std::span<const double> prefix, int t,
                                std::span<const double> state) const {
  long k = index_of(state[0]);
  double g, q;
  if (t == 0) {
    g = t_.init_target[(size_t)k];
    q = t_.init_proposal[(size_t)k];
  } else {
    long prev = index_of(prefix[prefix.size() - 1]);
    g = t_.trans_target[(size_t)(prev * t_.states + k)];
    q = t_.trans_proposal[(size_t)(prev * t_.states + k)];
  }
  if (g <= 0.0) return neg_inf;
  return std::log(g) - std::log(q);
}

double FiniteHmm::log_mass(std::span<const double> path) const {
  long k0 = index_of(path[0]);
  double g = t_.init_target[(size_t)k0];
  if (g <= 0.0) return neg_inf;
  double lm = std::log(g);
  for (size_t t = 1; t < path.size(); ++t) {
    long prev = index_of(path[t - 1]);
    long k = index_of(path[t]);
    double gt = t_.trans_target[(size_t)(prev * t_.states + k)];
    if (gt <= 0.0) return neg_inf;
    lm += std::log(gt);
  }
  return lm;
}

ConstrainedChain::ConstrainedChain(Params p) : p_(p) {
  require(p_.horizon >= 1, errc::invalid_argument, "chain: horizon >= 1");
  require(p_.width > 0.0 && p_.pull_sd > 0.0 && p_.terminal_halfwidth > 0.0 &&
              p_.width_decay > 0.0,
          errc::invalid_argument, "chain: scales must be positive");
  require(std::isfinite(p_.lead), errc::invalid_argument,
          "chain: lead must be finite");
  require(std::isnan(p_.ceiling_width) || p_.ceiling_width > 0.0,
          errc::invalid_argument, "chain: ceiling_width must be positive");
  require(p_.decoy_height >= 0.0 && std::isfinite(p_.decoy_height),
          errc::invalid_argument, "chain: decoy_height must be finite, >= 0");
  require(p_.decoy_sd > 0.0 && std::isfinite(p_.decoy_sd) &&
              std::isfinite(p_.decoy_pos) && std::isfinite(p_.decoy_vel),
          errc::invalid_argument, "chain: decoy mode must be finite, sd > 0");
}

double ConstrainedChain::halfwidth(int t) const {
  if (p_.width_decay == 1.0) return p_.width;
  return p_.width * std::pow(p_.width_decay, (double)t);
}

double ConstrainedChain::upper_halfwidth(int t) const {
  double w = std::isnan(p_.ceiling_width) ? p_.width : p_.ceiling_width;
  if (p_.width_decay == 1.0 || std::isinf(w)) return w;
  return w * std::pow(p_.width_decay, (double)t);
}

double ConstrainedChain::pull_center(int t) const {
  if (p_.lead == 0.0) return center(t);
  double next = t >= p_.horizon ? terminal_target() : center(t + 1);
  return center(t) + p_.lead * (next - center(t));
}

double ConstrainedChain::terminal_target() const {
  return std::isnan(p_.target) ? center(p_.horizon) : p_.target;
}

ConstrainedChain ConstrainedChain::surrogate_default() {
  // Center walks 0 -> 4.5 over 12 steps; the decoy is a sticky mode at the
  // starting basin that cannot reach the closure window in one jump.
  Params p;
  p.horizon = 12;
  p.accel = 0.0625;
  p.width = 8.0;
  p.width_decay = 0.97;
  p.pull_sd = 0.5;
  p.decoy_height = 300.0;
  p.decoy_pos = 0.0;
  p.decoy_vel = 0.0;
  p.decoy_sd = 0.0125;
  p.terminal_halfwidth = 0.5;
  return ConstrainedChain(p);
}

ConstrainedChain ConstrainedChain::tight_default() {
  Params p;
  p.horizon = 10;
  p.accel = 0.0;
  p.width = 1.6;
  p.width_decay = 0.88;
  p.pull_sd = 1.0;
  p.terminal_halfwidth = 0.25;
  return ConstrainedChain(p);
}

ConstrainedChain ConstrainedChain::open_default() {
  Params p;
  p.horizon = 8;
  p.accel = 0.0;
  p.width = std::numeric_limits<double>::infinity();
  p.width_decay = 1.0;
  p.pull_sd = 2.0;
  p.terminal_halfwidth = std::numeric_limits<double>::infinity();
  return ConstrainedChain(p);
}

void ConstrainedChain::propose(std::span<const double> prefix, int t,
                               StreamRng& rng,
                               std::span<double> out_state) const {
  double base = t == 0 ? 0.0 : prefix[prefix.size() - 1];
  out_state[0] = base + rng.normal(0.0, 1.0);
}

double ConstrainedChain::log_increment(std::span<const double>, int t,
                                       std::span<const double> state) const {
  double x = state[0];
  double d = x - center(t);
  if (d < -halfwidth(t) || d > upper_halfwidth(t)) return neg_inf;
  if (t == p_.horizon &&
      std::abs(x - terminal_target()) > p_.terminal_halfwidth)
    return neg_inf;
  double z = (x - pull_center(t)) / p_.pull_sd;
  double lp = -0.5 * z * z;
  if (p_.decoy_height > 0.0) {
    double y = (x - decoy_center(t)) / p_.decoy_sd;
    double ld = std::log(p_.decoy_height) - 0.5 * y * y;
    double hi = std::max(lp, ld), lo = std::min(lp, ld);
    lp = hi + std::log1p(std::exp(lo - hi));
  }
  return lp;
}

}  // namespace udsmc
