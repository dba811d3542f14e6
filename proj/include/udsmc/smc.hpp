#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "udsmc/model.hpp"
#include "udsmc/resample.hpp"

namespace udsmc {

enum class DownsampleRoute {
  none,        // population died before downsampling
  optimal,     // threshold + systematic residual pass
  keep_all,    // positive count == n, survivors unchanged
  multinomial, // positive count < n, with-replacement fallback
  resample,    // SISR per-step resampling
};

const char* route_name(DownsampleRoute r);

struct StepDiagnostics {
  int step = 0;
  long candidates = 0;
  long positive = 0;
  DownsampleRoute route = DownsampleRoute::none;
  double threshold_c = 0.0;  // scale of exp(lw - max lw); 0 when unused
  long kept = 0;
  long distinct = 0;       // distinct surviving paths
  double wall_ms = 0.0;    // telemetry only; never in deterministic outputs
};

struct RunDiagnostics {
  std::string algorithm;  // "updown" | "sisr-<scheme>" | "importance"
  long n = 0;
  long m = 0;
  uint64_t seed = 0;
  bool died = false;
  int died_at = -1;
  std::vector<StepDiagnostics> steps;
  // importance-sampling extras
  long long draws = 0;
  long long positive_draws = 0;
  long long proposals = 0;  // states drawn from the proposal, aborts included
  double acceptance_rate = 0.0;
  bool budget_exhausted = false;

  std::string to_json() const;
};

struct RunResult {
  ParticleEnsemble ensemble;
  RunDiagnostics diag;
};

// Extends every parent with m candidate children at step parents.step()+1.
// Child (n, m) draws from a stream keyed (seed, proposal, step, n*m+m) and
// weighs w_parent * increment; order and values are thread-count invariant.
// Parents must be normalized.
UpsampledSet upsample_step(const ParticleEnsemble& parents,
                           const SequentialModel& model, long m, uint64_t seed,
                           int threads = 1);

// Upsampling-downsampling driver: n*m initial draws downsampled to n, then
// per step m children per particle, downsampled back to n. Downsampling is
// optimal (without replacement, threshold rule) whenever at least n
// candidates carry weight, multinomial with replacement otherwise. Returns a
// normalized ensemble at the final step, or a dead result (empty ensemble,
// diag.died) with the fatal step recorded.
RunResult run_updown_smc(const SequentialModel& model, long n, long m,
                         uint64_t seed, int threads = 1);

// Classic one-child baseline: n initial draws, then per step one extension,
// weight update, full resample by the given scheme (uniform weights after).
RunResult run_sisr(const SequentialModel& model, long n, ResampleScheme scheme,
                   uint64_t seed, int threads = 1);

// Full-path importance sampling from the proposal. Draws paths (dead
// prefixes abort early) until n_target positive-weight paths accumulate, or
// max_draws paths, or max_proposals single-state draws (0 = no cap) are
// spent. Keeps only positive paths; diag carries draws, acceptance rate and
// the budget_exhausted flag when a cap fired first.
RunResult run_importance_sampling(const SequentialModel& model, long n_target,
                                  long long max_draws,
                                  long long max_proposals = 0,
                                  uint64_t seed = 1);

}  // namespace udsmc
