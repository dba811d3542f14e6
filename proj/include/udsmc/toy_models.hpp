#pragma once

#include <vector>

#include "udsmc/model.hpp"

namespace udsmc {

// Finite-state model whose unnormalized target mass factorizes over steps;
// enumerable, so estimates can be checked against exact expectations.
class EnumerableModel : public SequentialModel {
 public:
  virtual long n_states() const = 0;
  // Embedding of state index k into the value stored in paths (and hence the
  // value every statistic sees). Must be injective.
  virtual double state_value(long k) const = 0;
  // log unnormalized target mass of a full path of embedded state values;
  // -inf for zero mass. Implementations must compute this from the target
  // tables directly, not by summing log_increment, so enumeration stays an
  // independent check.
  virtual double log_mass(std::span<const double> path) const = 0;
};

// Exact expectation sum(f * mass) / sum(mass) over all |X|^(T+1) paths.
// too_large beyond max_paths (default 1e7).
std::vector<double> enumerate_exact(const EnumerableModel& model,
                                    const Statistic& f,
                                    long long max_paths = 10'000'000);

// Finite-state chain with user-set target potentials and proposal tables.
// Paths store embedded state values (state_values[k], distinct, default the
// index itself). Over state indices the target is
//   mass(x_0..x_T) = g0[x_0] * prod_t g[x_{t-1}][x_t],
// the proposal an initial distribution plus a row-stochastic transition.
class FiniteHmm final : public EnumerableModel {
 public:
  struct Tables {
    long states = 0;
    int horizon = 0;
    std::vector<double> init_target;      // size S, unnormalized, >= 0
    std::vector<double> init_proposal;    // size S, sums to 1
    std::vector<double> trans_target;     // S*S row-major, unnormalized
    std::vector<double> trans_proposal;   // S*S row-major, rows sum to 1
    std::vector<double> state_values;     // size S; default 0..S-1
  };

  explicit FiniteHmm(Tables t);

  // Reference instance used by the propriety checks: 3 states, horizon 4,
  // uniform proposals, mildly uneven target potentials.
  static FiniteHmm propriety_reference();

  int horizon() const override { return t_.horizon; }
  int state_dim() const override { return 1; }
  void propose(std::span<const double> prefix, int t, StreamRng& rng,
               std::span<double> out_state) const override;
  double log_increment(std::span<const double> prefix, int t,
                       std::span<const double> state) const override;

  long n_states() const override { return t_.states; }
  double state_value(long k) const override {
    return t_.state_values[(size_t)k];
  }
  double log_mass(std::span<const double> path) const override;

  const Tables& tables() const { return t_; }

 private:
  long index_of(double value) const;  // inverts the state_value embedding

  Tables t_;
  std::vector<double> init_cum_;   // proposal CDF
  std::vector<double> trans_cum_;  // per-row proposal CDF
};

// Scalar chain with standard-normal proposal increments and a hard corridor
// around a moving center c_t = 0.5 * accel * t^2: the target multiplies a
// smooth density by the indicator
//   c_t - h_t <= x_t <= c_t + u_t,   h_t = width * width_decay^t,
// plus a terminal closure window |x_T - target| <= eps. ceiling_width sets
// u_t (NaN = symmetric corridor, +inf = floor only). The smooth density is
// a broad pull toward c_t (sd pull_sd, optionally centered `lead` of the way
// toward the next center) plus an optional narrow decoy mode of relative
// height decoy_height at decoy_pos + decoy_vel * t (sd decoy_sd): a sticky,
// locally rewarding basin that cannot reach the closure window. The decoy is
// what separates resampling schemes: duplicate-heavy selection keeps piling
// slots onto the few decoy candidates and a run can lose every lineage that
// was walking toward the target, then misses the window; downsampling
// without replacement caps the decoy at one slot per candidate, so breadth
// survives. This mirrors locally favorable but unclosable conformations.
class ConstrainedChain final : public SequentialModel {
 public:
  struct Params {
    int horizon = 12;
    double accel = 0.0;
    double width = 1.0;
    double width_decay = 1.0;
    double pull_sd = 1.0;
    double lead = 0.0;  // pull-center offset, in next-step displacements
    double terminal_halfwidth = 1.0;
    // Upper corridor halfwidth before decay; NaN = same as width.
    double ceiling_width = std::numeric_limits<double>::quiet_NaN();
    // Decoy mode: weight of the sticky basin relative to the pull peak.
    // 0 disables it.
    double decoy_height = 0.0;
    double decoy_pos = 0.0;
    double decoy_vel = 0.0;
    double decoy_sd = 0.1;
    // NaN = corridor center at the horizon.
    double target = std::numeric_limits<double>::quiet_NaN();
  };

  explicit ConstrainedChain(Params p);

  // Degeneracy surrogate: tuned so that at a fixed candidate budget the
  // child count M has an interior optimum (deaths at M = 1, variance rising
  // again once the particle count gets small).
  static ConstrainedChain surrogate_default();
  // Tight variant: full-path proposal acceptance under 5%.
  static ConstrainedChain tight_default();
  // Unconstrained variant: every path feasible (acceptance exactly 1).
  static ConstrainedChain open_default();

  int horizon() const override { return p_.horizon; }
  int state_dim() const override { return 1; }
  void propose(std::span<const double> prefix, int t, StreamRng& rng,
               std::span<double> out_state) const override;
  double log_increment(std::span<const double> prefix, int t,
                       std::span<const double> state) const override;

  double center(int t) const { return 0.5 * p_.accel * (double)t * (double)t; }
  double halfwidth(int t) const;
  double upper_halfwidth(int t) const;
  // Where the pull is centered at step t; equals center(t) when lead is 0.
  double pull_center(int t) const;
  double decoy_center(int t) const { return p_.decoy_pos + p_.decoy_vel * (double)t; }
  double terminal_target() const;
  const Params& params() const { return p_; }

 private:
  Params p_;
};

}  // namespace udsmc
