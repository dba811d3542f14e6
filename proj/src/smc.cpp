#include "udsmc/smc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <thread>

#include "json.hpp"
#include "udsmc/errors.hpp"
#include "udsmc/parallel.hpp"

namespace udsmc {

void parallel_chunks(long count, int threads,
                     const std::function<void(long, long)>& fn) {
  if (count <= 0) return;
  long nthreads = std::min<long>(std::max(threads, 1), count);
  if (nthreads <= 1) {
    fn(0, count);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve((size_t)nthreads - 1);
  long chunk = (count + nthreads - 1) / nthreads;
  for (long w = 1; w < nthreads; ++w) {
    long lo = w * chunk;
    long hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back(fn, lo, hi);
  }
  fn(0, std::min(count, chunk));
  for (auto& t : pool) t.join();
}

const char* route_name(DownsampleRoute r) {
  switch (r) {
    case DownsampleRoute::none: return "none";
    case DownsampleRoute::optimal: return "optimal";
    case DownsampleRoute::keep_all: return "keep_all";
    case DownsampleRoute::multinomial: return "multinomial";
    case DownsampleRoute::resample: return "resample";
  }
  return "?";
}

std::string RunDiagnostics::to_json() const {
  nlohmann::json j;
  j["algorithm"] = algorithm;
  j["n"] = n;
  j["m"] = m;
  j["seed"] = seed;
  j["died"] = died;
  j["died_at"] = died_at;
  if (algorithm == "importance") {
    j["draws"] = draws;
    j["positive_draws"] = positive_draws;
    j["proposals"] = proposals;
    j["acceptance_rate"] = acceptance_rate;
    j["budget_exhausted"] = budget_exhausted;
  }
  j["steps"] = nlohmann::json::array();
  for (const auto& s : steps) {
    nlohmann::json sj;
    sj["step"] = s.step;
    sj["candidates"] = s.candidates;
    sj["positive"] = s.positive;
    sj["route"] = route_name(s.route);
    sj["threshold_c"] = s.threshold_c;
    sj["kept"] = s.kept;
    sj["distinct"] = s.distinct;
    sj["wall_ms"] = s.wall_ms;
    j["steps"].push_back(std::move(sj));
  }
  return j.dump();
}

namespace {

using clock_t_ = std::chrono::steady_clock;

double ms_since(clock_t_::time_point t0) {
  return std::chrono::duration<double, std::milli>(clock_t_::now() - t0)
      .count();
}

// n_total initial candidates at step 0, indexed like (parent, child).
UpsampledSet initial_upsample(const SequentialModel& model, long n_parents,
                              long m_children, uint64_t seed, int threads) {
  UpsampledSet ups;
  ups.state_dim = model.state_dim();
  ups.step = 0;
  ups.n_parents = n_parents;
  ups.m_children = m_children;
  long total = n_parents * m_children;
  ups.paths.resize((size_t)total * ups.path_len());
  ups.log_weights.resize((size_t)total);
  ups.parent.resize((size_t)total);

  size_t dim = (size_t)ups.state_dim;
  parallel_chunks(total, threads, [&](long lo, long hi) {
    for (long i = lo; i < hi; ++i) {
      StreamRng rng(seed, rng_role::proposal, 0, (uint64_t)i);
      std::span<double> state{ups.paths.data() + (size_t)i * dim, dim};
      model.propose({}, 0, rng, state);
      ups.log_weights[(size_t)i] = model.log_increment({}, 0, state);
      ups.parent[(size_t)i] = (int32_t)(i / m_children);
    }
  });
  ups.positive = positive_count(ups.log_weights);
  return ups;
}

ParticleEnsemble take_survivors(const UpsampledSet& ups,
                                const DownsampleOutcome& out) {
  ParticleEnsemble next(ups.state_dim, ups.step, (long)out.selected.size());
  size_t len = ups.path_len();
  for (size_t j = 0; j < out.selected.size(); ++j) {
    auto src = ups.path(out.selected[j]);
    std::memcpy(next.mutable_path((long)j).data(), src.data(),
                len * sizeof(double));
    next.set_log_weight((long)j, out.new_log_weights[j]);
  }
  next.normalize();
  return next;
}

}  // namespace

UpsampledSet upsample_step(const ParticleEnsemble& parents,
                           const SequentialModel& model, long m, uint64_t seed,
                           int threads) {
  require(parents.normalized(), errc::invalid_argument,
          "upsample: parents must be normalized");
  require(m >= 1, errc::invalid_argument, "upsample: m must be >= 1");
  int t = parents.step() + 1;
  require(t <= model.horizon(), errc::invalid_argument,
          "upsample: past model horizon");

  UpsampledSet ups;
  ups.state_dim = parents.state_dim();
  ups.step = t;
  ups.n_parents = parents.size();
  ups.m_children = m;
  long total = ups.n_parents * m;
  ups.paths.resize((size_t)total * ups.path_len());
  ups.log_weights.resize((size_t)total);
  ups.parent.resize((size_t)total);

  size_t prefix_len = parents.path_len();
  size_t dim = (size_t)ups.state_dim;
  parallel_chunks(total, threads, [&](long lo, long hi) {
    for (long i = lo; i < hi; ++i) {
      long parent = i / m;
      double* dst = ups.paths.data() + (size_t)i * ups.path_len();
      auto prefix = parents.path(parent);
      std::memcpy(dst, prefix.data(), prefix_len * sizeof(double));
      StreamRng rng(seed, rng_role::proposal, (uint64_t)t, (uint64_t)i);
      std::span<double> state{dst + prefix_len, dim};
      model.propose(prefix, t, rng, state);
      double inc = model.log_increment(prefix, t, state);
      double plw = parents.log_weight(parent);
      ups.log_weights[(size_t)i] = plw == neg_inf ? neg_inf : plw + inc;
      ups.parent[(size_t)i] = (int32_t)parent;
    }
  });
  ups.positive = positive_count(ups.log_weights);
  return ups;
}

RunResult run_updown_smc(const SequentialModel& model, long n, long m,
                         uint64_t seed, int threads) {
  require(n >= 1 && m >= 1, errc::invalid_argument,
          "run_updown_smc: n and m must be >= 1");
  RunResult res;
  res.diag.algorithm = "updown";
  res.diag.n = n;
  res.diag.m = m;
  res.diag.seed = seed;

  ParticleEnsemble ens;
  for (int t = 0; t <= model.horizon(); ++t) {
    auto t0 = clock_t_::now();
    UpsampledSet ups = t == 0
                           ? initial_upsample(model, n, m, seed, threads)
                           : upsample_step(ens, model, m, seed, threads);
    StepDiagnostics sd;
    sd.step = t;
    sd.candidates = ups.size();
    sd.positive = ups.positive;
    if (ups.positive == 0) {
      sd.wall_ms = ms_since(t0);
      res.diag.steps.push_back(sd);
      res.diag.died = true;
      res.diag.died_at = t;
      res.ensemble = ParticleEnsemble(model.state_dim(), t, 0);
      return res;
    }
    StreamRng down_rng(seed, rng_role::downsample, (uint64_t)t, 0);
    DownsampleOutcome out;
    if (ups.positive >= n) {
      out = optimal_downsample(ups.log_weights, n, down_rng);
      sd.route = out.threshold.keep_all ? DownsampleRoute::keep_all
                                        : DownsampleRoute::optimal;
      sd.threshold_c = out.threshold.c;
      sd.kept = out.threshold.kept;
    } else {
      out = multinomial_downsample(ups.log_weights, n, down_rng);
      sd.route = DownsampleRoute::multinomial;
    }
    ens = take_survivors(ups, out);
    sd.distinct = ens.distinct_paths();
    sd.wall_ms = ms_since(t0);
    res.diag.steps.push_back(sd);
  }
  res.ensemble = std::move(ens);
  return res;
}

RunResult run_sisr(const SequentialModel& model, long n, ResampleScheme scheme,
                   uint64_t seed, int threads) {
  require(n >= 1, errc::invalid_argument, "run_sisr: n must be >= 1");
  RunResult res;
  res.diag.algorithm = std::string("sisr-") + resample_scheme_name(scheme);
  res.diag.n = n;
  res.diag.m = 1;
  res.diag.seed = seed;

  auto t0 = clock_t_::now();
  UpsampledSet init = initial_upsample(model, n, 1, seed, threads);
  StepDiagnostics sd0;
  sd0.step = 0;
  sd0.candidates = n;
  sd0.positive = init.positive;
  if (init.positive == 0) {
    sd0.wall_ms = ms_since(t0);
    res.diag.steps.push_back(sd0);
    res.diag.died = true;
    res.diag.died_at = 0;
    res.ensemble = ParticleEnsemble(model.state_dim(), 0, 0);
    return res;
  }
  // Initial weights carry into the first extension; resampling starts at
  // step 1.
  ParticleEnsemble ens(model.state_dim(), 0, n);
  std::memcpy(ens.mutable_path(0).data(), init.paths.data(),
              init.paths.size() * sizeof(double));
  for (long i = 0; i < n; ++i) ens.set_log_weight(i, init.log_weights[(size_t)i]);
  ens.normalize();
  sd0.distinct = ens.distinct_paths();
  sd0.wall_ms = ms_since(t0);
  res.diag.steps.push_back(sd0);

  for (int t = 1; t <= model.horizon(); ++t) {
    t0 = clock_t_::now();
    UpsampledSet ups = upsample_step(ens, model, 1, seed, threads);
    StepDiagnostics sd;
    sd.step = t;
    sd.candidates = n;
    sd.positive = ups.positive;
    if (ups.positive == 0) {
      sd.wall_ms = ms_since(t0);
      res.diag.steps.push_back(sd);
      res.diag.died = true;
      res.diag.died_at = t;
      res.ensemble = ParticleEnsemble(model.state_dim(), t, 0);
      return res;
    }
    StreamRng down_rng(seed, rng_role::downsample, (uint64_t)t, 0);
    auto idx = resample_indices(ups.log_weights, n, scheme, down_rng);
    ParticleEnsemble next(model.state_dim(), t, n);
    size_t len = ups.path_len();
    double lw = -std::log((double)n);
    for (long j = 0; j < n; ++j) {
      std::memcpy(next.mutable_path(j).data(), ups.path(idx[(size_t)j]).data(),
                  len * sizeof(double));
      next.set_log_weight(j, lw);
    }
    next.normalize();
    ens = std::move(next);
    sd.route = DownsampleRoute::resample;
    sd.distinct = ens.distinct_paths();
    sd.wall_ms = ms_since(t0);
    res.diag.steps.push_back(sd);
  }
  res.ensemble = std::move(ens);
  return res;
}

RunResult run_importance_sampling(const SequentialModel& model, long n_target,
                                  long long max_draws, long long max_proposals,
                                  uint64_t seed) {
  require(n_target >= 1, errc::invalid_argument, "importance: n_target >= 1");
  require(max_draws >= 1, errc::invalid_argument, "importance: max_draws >= 1");
  RunResult res;
  res.diag.algorithm = "importance";
  res.diag.n = n_target;
  res.diag.m = 0;
  res.diag.seed = seed;

  int T = model.horizon();
  size_t dim = (size_t)model.state_dim();
  size_t path_len = (size_t)(T + 1) * dim;
  std::vector<double> path(path_len);
  std::vector<double> kept_paths;
  std::vector<double> kept_lw;

  long long draws = 0, positives = 0, proposals = 0;
  // Paths are scanned in draw order so the stopping point is deterministic;
  // each draw has its own keyed stream.
  while (positives < n_target && draws < max_draws &&
         (max_proposals == 0 || proposals < max_proposals)) {
    StreamRng rng(seed, rng_role::path, (uint64_t)draws, 0);
    double lw = 0.0;
    for (int t = 0; t <= T; ++t) {
      std::span<const double> prefix{path.data(), (size_t)t * dim};
      std::span<double> state{path.data() + (size_t)t * dim, dim};
      model.propose(prefix, t, rng, state);
      ++proposals;
      lw += model.log_increment(prefix, t, state);
      if (lw == neg_inf) break;  // dead prefix: abort the rest of the path
    }
    ++draws;
    if (lw != neg_inf) {
      ++positives;
      kept_paths.insert(kept_paths.end(), path.begin(), path.end());
      kept_lw.push_back(lw);
    }
  }

  res.diag.draws = draws;
  res.diag.positive_draws = positives;
  res.diag.proposals = proposals;
  res.diag.acceptance_rate = draws > 0 ? (double)positives / (double)draws : 0.0;
  res.diag.budget_exhausted = positives < n_target;
  res.diag.died = positives == 0;

  ParticleEnsemble ens(model.state_dim(), T, positives);
  if (positives > 0) {
    std::memcpy(ens.mutable_path(0).data(), kept_paths.data(),
                kept_paths.size() * sizeof(double));
    for (long i = 0; i < positives; ++i)
      ens.set_log_weight(i, kept_lw[(size_t)i]);
  }
  res.ensemble = std::move(ens);
  return res;
}

}  // namespace udsmc
