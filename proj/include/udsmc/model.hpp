#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "udsmc/logsum.hpp"
#include "udsmc/rng.hpp"

namespace udsmc {

// A sequential target decomposed into per-step proposal and weight increment.
//
// Paths are flat double buffers: state_dim() doubles per step, steps
// 0..horizon(). Step 0 is the initial draw (empty prefix). log_increment
// returns the log pointwise ratio of target against proposal contributed by
// extending `prefix` with `state` at step t; -inf marks a dead extension
// (zero target mass). Implementations must be pure: same arguments and the
// same rng stream state give the same result on any thread.
class SequentialModel {
 public:
  virtual ~SequentialModel() = default;

  virtual int horizon() const = 0;    // final step index T; path length T+1
  virtual int state_dim() const = 0;  // doubles per state

  virtual void propose(std::span<const double> prefix, int t, StreamRng& rng,
                       std::span<double> out_state) const = 0;
  virtual double log_increment(std::span<const double> prefix, int t,
                               std::span<const double> state) const = 0;
};

struct ParticleRef {
  std::span<const double> path;
  double log_weight;
};

// Fixed-size population of weighted paths, flat storage. Weights live in log
// space; normalized() means log-weights were shifted so weights sum to 1.
class ParticleEnsemble {
 public:
  ParticleEnsemble() = default;
  ParticleEnsemble(int state_dim, int step, long count)
      : state_dim_(state_dim),
        step_(step),
        paths_((size_t)count * (size_t)(step + 1) * (size_t)state_dim, 0.0),
        log_weights_((size_t)count, 0.0) {}

  long size() const { return (long)log_weights_.size(); }
  int step() const { return step_; }
  int state_dim() const { return state_dim_; }
  size_t path_len() const { return (size_t)(step_ + 1) * (size_t)state_dim_; }
  bool normalized() const { return normalized_; }

  std::span<const double> path(long i) const {
    return {paths_.data() + (size_t)i * path_len(), path_len()};
  }
  std::span<double> mutable_path(long i) {
    return {paths_.data() + (size_t)i * path_len(), path_len()};
  }
  double log_weight(long i) const { return log_weights_[(size_t)i]; }
  void set_log_weight(long i, double lw) {
    log_weights_[(size_t)i] = lw;
    normalized_ = false;
  }
  ParticleRef particle(long i) const { return {path(i), log_weight(i)}; }
  std::span<const double> log_weights() const { return log_weights_; }

  long positive() const { return positive_count(log_weights_); }

  // Shift log-weights so weights sum to 1; returns the log total mass that
  // was removed. no_mass if every particle is dead.
  double normalize();

  // Count of bitwise-distinct paths.
  long distinct_paths() const;

  double entropy() const { return weight_entropy(log_weights_); }

 private:
  friend struct EnsembleBuilder;
  int state_dim_ = 1;
  int step_ = 0;
  bool normalized_ = false;
  std::vector<double> paths_;
  std::vector<double> log_weights_;
};

// One upsampling round: every parent extended by m_children candidates.
// Candidate (n, m) sits at index n * m_children + m; this ordering is part
// of the determinism contract.
struct UpsampledSet {
  int state_dim = 1;
  int step = 0;            // step the candidates extend to
  long n_parents = 0;
  long m_children = 0;
  std::vector<double> paths;        // (n*m) x (step+1)*state_dim
  std::vector<double> log_weights;  // n*m
  std::vector<int32_t> parent;      // n*m
  long positive = 0;

  long size() const { return n_parents * m_children; }
  size_t path_len() const { return (size_t)(step + 1) * (size_t)state_dim; }
  std::span<const double> path(long i) const {
    return {paths.data() + (size_t)i * path_len(), path_len()};
  }
};

// Vector-valued path functional for estimates.
class Statistic {
 public:
  virtual ~Statistic() = default;
  virtual int dim() const = 0;
  virtual void eval(std::span<const double> path,
                    std::span<double> out) const = 0;
};

struct EstimateReport {
  std::vector<double> value;  // one per statistic dimension
  long n_particles = 0;
  long n_distinct = 0;
  double weight_entropy = 0.0;
};

// Self-normalized weighted mean sum(f*w)/sum(w), log-sum-exp stabilized;
// invariant to scaling all weights. no_mass if nothing is alive.
EstimateReport estimate(const ParticleEnsemble& ens, const Statistic& f);

}  // namespace udsmc
