#include "udsmc/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <vector>

#include "json_util.hpp"
#include "udsmc/errors.hpp"
#include "udsmc/model_factory.hpp"
#include "udsmc/parallel.hpp"
#include "udsmc/smc.hpp"
#include "udsmc/statistics.hpp"
#include "udsmc/tables.hpp"
#include "udsmc/textio.hpp"
#include "udsmc/toy_models.hpp"
#include "udsmc/version.hpp"

#ifndef UDSMC_GIT_HASH
#define UDSMC_GIT_HASH "unknown"
#endif

namespace udsmc {
namespace {

using jsonu::json;
using jsonu::check_keys;
using jsonu::find;
using jsonu::int_of;
using jsonu::need_int;
using jsonu::need_str;
using jsonu::num_of;
using jsonu::opt_bool;
using jsonu::opt_int;
using jsonu::opt_num;
using jsonu::opt_str;

namespace fs = std::filesystem;
using steady = std::chrono::steady_clock;

double seconds_since(steady::time_point t0) {
  return std::chrono::duration<double>(steady::now() - t0).count();
}

// Seed-derivation namespace per algorithm; keeps every (algorithm, m, n,
// repetition) cell on its own stream so any cell can be rerun in isolation.
constexpr uint64_t kAlgoUpdown = 1;
constexpr uint64_t kAlgoImportance = 2;
constexpr uint64_t kAlgoTruth = 4;

uint64_t rep_seed(uint64_t seed, uint64_t algo, long m, long n, long rep) {
  return mix64(mix64(seed, algo), (uint64_t)m, (uint64_t)n, (uint64_t)rep);
}

struct RepOut {
  bool died = false;
  int died_at = -1;
  std::vector<double> values;  // one per bundle dimension; empty when died
};

// One experiment cell: a fixed algorithm and population configuration,
// repeated `reps.size()` times.
struct CellResult {
  std::string algorithm;  // "updown" | "importance"
  long mn = 0;            // candidate count per step (M * N)
  long m = 0;             // 0 for importance sampling
  long n = 0;
  std::vector<RepOut> reps;
  double wall_s = 0.0;
};

std::vector<double> flatten_estimates(const ModelBundle& b,
                                      const ParticleEnsemble& ens) {
  std::vector<double> out;
  out.reserve(b.dim_names.size());
  std::vector<EstimateReport> reports;
  reports.reserve(b.stats.size());
  for (const auto& s : b.stats) reports.push_back(estimate(ens, *s));
  for (auto [si, comp] : b.dim_map) out.push_back(reports[si].value[comp]);
  return out;
}

// Runs fn(rep) for every repetition, capturing worker exceptions and
// rethrowing the first in repetition order.
void for_each_rep(long count, int threads,
                  const std::function<void(long)>& fn) {
  std::vector<std::exception_ptr> errs((size_t)count);
  parallel_chunks(count, threads, [&](long lo, long hi) {
    for (long r = lo; r < hi; ++r) {
      try {
        fn(r);
      } catch (...) {
        errs[(size_t)r] = std::current_exception();
      }
    }
  });
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

CellResult run_updown_cell(const ModelBundle& b, long n, long m, long reps,
                           uint64_t seed, int threads) {
  CellResult cell;
  cell.algorithm = "updown";
  cell.mn = m * n;
  cell.m = m;
  cell.n = n;
  cell.reps.resize((size_t)reps);
  auto t0 = steady::now();
  for_each_rep(reps, threads, [&](long r) {
    RunResult run = run_updown_smc(*b.model, n, m,
                                   rep_seed(seed, kAlgoUpdown, m, n, r), 1);
    RepOut& out = cell.reps[(size_t)r];
    out.died = run.diag.died;
    out.died_at = run.diag.died_at;
    if (!out.died) out.values = flatten_estimates(b, run.ensemble);
  });
  cell.wall_s = seconds_since(t0);
  return cell;
}

// Matched-budget baseline: the same total number of proposal draws the
// updown run spends, MN states per step over T+1 steps.
CellResult run_importance_cell(const ModelBundle& b, long n, long m, long reps,
                               uint64_t seed, int threads) {
  CellResult cell;
  cell.algorithm = "importance";
  cell.mn = m * n;
  cell.m = 0;
  cell.n = n;
  cell.reps.resize((size_t)reps);
  long long budget = (long long)cell.mn * (long long)(b.model->horizon() + 1);
  auto t0 = steady::now();
  for_each_rep(reps, threads, [&](long r) {
    RunResult run = run_importance_sampling(
        *b.model, std::numeric_limits<long>::max(),
        std::numeric_limits<long long>::max(), budget,
        rep_seed(seed, kAlgoImportance, m, n, r));
    RepOut& out = cell.reps[(size_t)r];
    out.died = run.diag.died;
    if (!out.died) out.values = flatten_estimates(b, run.ensemble);
  });
  cell.wall_s = seconds_since(t0);
  return cell;
}

// --- exact / reference expectations -----------------------------------------

struct TruthOut {
  std::string kind;
  std::vector<double> values;            // per bundle dimension
  std::vector<double> split_a, split_b;  // halves; importance truth only
  json info;                             // sidecar details
};

// Forward-backward trapezoid quadrature for the corridor chain: per-step
// grids over the corridor support (pull-scaled fallback when a width is
// infinite), standard-normal transition kernel, Gaussian pull as the state
// factor. Returns E[x_t] for t = 0..T. Deterministic in (params, points).
std::vector<double> chain_marginal_means(const ConstrainedChain& c,
                                         long points) {
  int T = c.horizon();
  const auto& p = c.params();
  require(p.pull_sd > 0.0 && std::isfinite(p.pull_sd), errc::invalid_argument,
          "quadrature: pull_sd must be positive and finite");
  std::vector<std::vector<double>> X((size_t)T + 1), W((size_t)T + 1);
  for (int t = 0; t <= T; ++t) {
    double ct = c.center(t), ht = c.halfwidth(t), ut = c.upper_halfwidth(t);
    double spread = 10.0 * p.pull_sd + 3.0 * std::sqrt((double)t + 1.0) + 1.0;
    double pc = c.pull_center(t);
    if (p.decoy_height > 0.0) pc = c.decoy_center(t);  // widen the fallback
    double lo = std::isfinite(ht) ? ct - ht
                                  : std::min({ct, c.pull_center(t), pc}) - spread;
    double hi = std::isfinite(ut) ? ct + ut
                                  : std::max({ct, c.pull_center(t), pc}) + spread;
    if (t == T && std::isfinite(p.terminal_halfwidth)) {
      lo = std::max(lo, c.terminal_target() - p.terminal_halfwidth);
      hi = std::min(hi, c.terminal_target() + p.terminal_halfwidth);
    }
    require(hi > lo, errc::no_mass, "quadrature: empty support at a step");
    auto& x = X[(size_t)t];
    auto& w = W[(size_t)t];
    x.resize((size_t)points);
    w.assign((size_t)points, 0.0);
    double dx = (hi - lo) / (double)(points - 1);
    for (long i = 0; i < points; ++i) x[(size_t)i] = lo + dx * (double)i;
    x.back() = hi;
    for (long i = 0; i < points; ++i)
      w[(size_t)i] = (i == 0 || i == points - 1) ? 0.5 * dx : dx;
  }

  auto pull = [&](double x, int t) {
    double z = (x - c.pull_center(t)) / p.pull_sd;
    double g = std::exp(-0.5 * z * z);
    if (p.decoy_height > 0.0) {
      double y = (x - c.decoy_center(t)) / p.decoy_sd;
      g += p.decoy_height * std::exp(-0.5 * y * y);
    }
    return g;
  };
  auto rescale = [](std::vector<double>& v) {
    double mx = 0.0;
    for (double e : v) mx = std::max(mx, e);
    require(mx > 0.0, errc::no_mass, "quadrature: zero mass at a step");
    for (double& e : v) e /= mx;
  };

  std::vector<std::vector<double>> A((size_t)T + 1), B((size_t)T + 1);
  A[0].resize((size_t)points);
  for (long i = 0; i < points; ++i) {
    double x = X[0][(size_t)i];
    A[0][(size_t)i] = std::exp(-0.5 * x * x) * pull(x, 0);
  }
  rescale(A[0]);
  for (int t = 1; t <= T; ++t) {
    auto& prev_x = X[(size_t)t - 1];
    auto& prev_w = W[(size_t)t - 1];
    auto& prev_a = A[(size_t)t - 1];
    auto& a = A[(size_t)t];
    a.resize((size_t)points);
    for (long i = 0; i < points; ++i) {
      double x = X[(size_t)t][(size_t)i];
      double s = 0.0;
      for (long j = 0; j < points; ++j) {
        double d = x - prev_x[(size_t)j];
        s += prev_w[(size_t)j] * prev_a[(size_t)j] * std::exp(-0.5 * d * d);
      }
      a[(size_t)i] = s * pull(x, t);
    }
    rescale(a);
  }
  B[(size_t)T].assign((size_t)points, 1.0);
  for (int t = T - 1; t >= 0; --t) {
    auto& next_x = X[(size_t)t + 1];
    auto& next_w = W[(size_t)t + 1];
    auto& next_b = B[(size_t)t + 1];
    auto& b = B[(size_t)t];
    b.resize((size_t)points);
    for (long j = 0; j < points; ++j) {
      double y = X[(size_t)t][(size_t)j];
      double s = 0.0;
      for (long i = 0; i < points; ++i) {
        double d = next_x[(size_t)i] - y;
        s += next_w[(size_t)i] * next_b[(size_t)i] * pull(next_x[(size_t)i], t + 1) *
             std::exp(-0.5 * d * d);
      }
      b[(size_t)j] = s;
    }
    rescale(b);
  }

  std::vector<double> means((size_t)T + 1);
  for (int t = 0; t <= T; ++t) {
    double num = 0.0, den = 0.0;
    for (long i = 0; i < points; ++i) {
      double mass = W[(size_t)t][(size_t)i] * A[(size_t)t][(size_t)i] *
                    B[(size_t)t][(size_t)i];
      num += mass * X[(size_t)t][(size_t)i];
      den += mass;
    }
    require(den > 0.0, errc::no_mass, "quadrature: zero posterior mass");
    means[(size_t)t] = num / den;
  }
  return means;
}

TruthOut truth_enumerate(const json* tcfg, const ModelBundle& b) {
  require(b.enumerable != nullptr, errc::oracle_unavailable,
          "enumerate truth requires a finite-state model");
  long long max_paths = 10'000'000;
  if (tcfg) max_paths = opt_int(*tcfg, "max_paths", (long)max_paths);
  TruthOut out;
  out.kind = "enumerate";
  std::vector<std::vector<double>> per_stat;
  per_stat.reserve(b.stats.size());
  for (const auto& s : b.stats)
    per_stat.push_back(enumerate_exact(*b.enumerable, *s, max_paths));
  for (auto [si, comp] : b.dim_map) out.values.push_back(per_stat[si][comp]);
  out.info["max_paths"] = max_paths;
  return out;
}

TruthOut truth_quadrature(const json* tcfg, const ModelBundle& b) {
  require(b.chain != nullptr, errc::oracle_unavailable,
          "quadrature truth requires the corridor chain model");
  long points = 2001;
  if (tcfg) points = opt_int(*tcfg, "grid_points", points);
  require(points >= 51 && points <= 100001, errc::invalid_argument,
          "quadrature: grid_points must be in [51, 100001]");
  for (const auto& s : b.specs)
    require(s.kind == "terminal_value" || s.kind == "path_sum",
            errc::oracle_unavailable,
            "quadrature truth covers terminal_value and path_sum only");
  std::vector<double> means = chain_marginal_means(*b.chain, points);
  TruthOut out;
  out.kind = "quadrature";
  for (auto [si, comp] : b.dim_map) {
    (void)comp;
    if (b.specs[si].kind == "terminal_value") {
      out.values.push_back(means.back());
    } else {
      double s = 0.0;
      for (double m : means) s += m;
      out.values.push_back(s);
    }
  }
  out.info["grid_points"] = points;
  return out;
}

TruthOut truth_importance(const json* tcfg, const ModelBundle& b,
                          uint64_t seed) {
  long n_target = 200'000;
  long long max_draws = 1'000'000'000'000LL;
  long long max_proposals = 0;
  if (tcfg) {
    n_target = opt_int(*tcfg, "n_target", n_target);
    max_draws = opt_int(*tcfg, "max_draws", (long)max_draws);
    max_proposals = opt_int(*tcfg, "max_proposals", (long)max_proposals);
  }
  RunResult run = run_importance_sampling(*b.model, n_target, max_draws,
                                          max_proposals,
                                          mix64(seed, kAlgoTruth));
  require(!run.diag.died, errc::all_particles_dead,
          "importance truth produced no positive-weight paths");
  TruthOut out;
  out.kind = "importance";
  out.values = flatten_estimates(b, run.ensemble);

  // Split-half agreement check: disjoint halves by draw parity.
  const ParticleEnsemble& ens = run.ensemble;
  long na = (ens.size() + 1) / 2, nb = ens.size() / 2;
  if (nb > 0) {
    ParticleEnsemble ha(ens.state_dim(), ens.step(), na);
    ParticleEnsemble hb(ens.state_dim(), ens.step(), nb);
    for (long i = 0; i < ens.size(); ++i) {
      ParticleEnsemble& dst = (i % 2 == 0) ? ha : hb;
      long k = i / 2;
      auto src = ens.path(i);
      std::copy(src.begin(), src.end(), dst.mutable_path(k).begin());
      dst.set_log_weight(k, ens.log_weight(i));
    }
    out.split_a = flatten_estimates(b, ha);
    out.split_b = flatten_estimates(b, hb);
  }
  out.info["n_target"] = n_target;
  out.info["draws"] = run.diag.draws;
  out.info["positive_draws"] = run.diag.positive_draws;
  out.info["acceptance_rate"] = run.diag.acceptance_rate;
  out.info["budget_exhausted"] = run.diag.budget_exhausted;
  return out;
}

TruthOut compute_truth(const json* tcfg, const ModelBundle& b, uint64_t seed) {
  std::string kind;
  if (tcfg) {
    check_keys(*tcfg,
               {"kind", "max_paths", "grid_points", "n_target", "max_draws",
                "max_proposals"},
               "truth config");
    kind = opt_str(*tcfg, "kind", "");
  }
  if (kind.empty()) {
    if (b.enumerable)
      kind = "enumerate";
    else if (b.chain)
      kind = "quadrature";
    else
      fail(errc::oracle_unavailable,
           "no default exact oracle for this model; set truth.kind to "
           "'importance' with an explicit budget");
  }
  if (kind == "enumerate") return truth_enumerate(tcfg, b);
  if (kind == "quadrature") return truth_quadrature(tcfg, b);
  if (kind == "importance") return truth_importance(tcfg, b, seed);
  fail(errc::invalid_argument, "truth: unknown kind '" + kind + "'");
}

// --- output files ------------------------------------------------------------

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), errc::io_error, "cannot open " + path.string());
  out.write(content.data(), (std::streamsize)content.size());
  out.flush();
  require(out.good(), errc::io_error, "cannot write " + path.string());
}

void append_int(std::string& s, long long v) { s += std::to_string(v); }

std::string results_csv(const std::string& experiment,
                        const std::vector<CellResult>& cells,
                        const ModelBundle& b) {
  std::string out = "experiment,algorithm,mn,m,n,repetition,statistic,value,died\n";
  for (const auto& cell : cells) {
    for (size_t r = 0; r < cell.reps.size(); ++r) {
      const RepOut& rep = cell.reps[r];
      for (size_t d = 0; d < b.dim_names.size(); ++d) {
        out += experiment;
        out += ',';
        out += cell.algorithm;
        out += ',';
        append_int(out, cell.mn);
        out += ',';
        append_int(out, cell.m);
        out += ',';
        append_int(out, cell.n);
        out += ',';
        append_int(out, (long long)r);
        out += ',';
        out += b.dim_names[d];
        out += ',';
        if (!rep.died) out += fmt_double(rep.values[d]);
        out += ',';
        out += rep.died ? '1' : '0';
        out += '\n';
      }
    }
  }
  return out;
}

struct DimSummary {
  long completed = 0;
  long deaths = 0;
  double mean = 0.0;
  double variance = 0.0;  // sample variance; meaningful when completed >= 2
};

DimSummary summarize_dim(const CellResult& cell, size_t d) {
  DimSummary s;
  for (const auto& rep : cell.reps) {
    if (rep.died) {
      ++s.deaths;
    } else {
      ++s.completed;
      s.mean += rep.values[d];
    }
  }
  if (s.completed > 0) s.mean /= (double)s.completed;
  if (s.completed >= 2) {
    double acc = 0.0;
    for (const auto& rep : cell.reps) {
      if (rep.died) continue;
      double e = rep.values[d] - s.mean;
      acc += e * e;
    }
    s.variance = acc / (double)(s.completed - 1);
  }
  return s;
}

std::string summary_csv(const std::string& experiment,
                        const std::vector<CellResult>& cells,
                        const ModelBundle& b) {
  std::string out =
      "experiment,algorithm,mn,m,n,statistic,completed,deaths,mean,variance\n";
  for (const auto& cell : cells) {
    for (size_t d = 0; d < b.dim_names.size(); ++d) {
      DimSummary s = summarize_dim(cell, d);
      out += experiment;
      out += ',';
      out += cell.algorithm;
      out += ',';
      append_int(out, cell.mn);
      out += ',';
      append_int(out, cell.m);
      out += ',';
      append_int(out, cell.n);
      out += ',';
      out += b.dim_names[d];
      out += ',';
      append_int(out, s.completed);
      out += ',';
      append_int(out, s.deaths);
      out += ',';
      if (s.completed >= 1) out += fmt_double(s.mean);
      out += ',';
      if (s.completed >= 2) out += fmt_double(s.variance);
      out += '\n';
    }
  }
  return out;
}

std::string rmse_csv(const std::string& experiment,
                     const std::vector<CellResult>& cells,
                     const ModelBundle& b, const TruthOut& truth) {
  std::string out =
      "experiment,algorithm,m,n,statistic,completed,deaths,rmse\n";
  for (const auto& cell : cells) {
    for (size_t d = 0; d < b.dim_names.size(); ++d) {
      long completed = 0, deaths = 0;
      double acc = 0.0;
      for (const auto& rep : cell.reps) {
        if (rep.died) {
          ++deaths;
          continue;
        }
        ++completed;
        double e = rep.values[d] - truth.values[d];
        acc += e * e;
      }
      out += experiment;
      out += ',';
      out += cell.algorithm;
      out += ',';
      append_int(out, cell.m);
      out += ',';
      append_int(out, cell.n);
      out += ',';
      out += b.dim_names[d];
      out += ',';
      append_int(out, completed);
      out += ',';
      append_int(out, deaths);
      out += ',';
      if (completed >= 1) out += fmt_double(std::sqrt(acc / (double)completed));
      out += '\n';
    }
  }
  return out;
}

std::string truth_csv(const ModelBundle& b, const TruthOut& truth) {
  std::string out = "statistic,value,split_a,split_b\n";
  for (size_t d = 0; d < b.dim_names.size(); ++d) {
    out += b.dim_names[d];
    out += ',';
    out += fmt_double(truth.values[d]);
    out += ',';
    if (!truth.split_a.empty()) out += fmt_double(truth.split_a[d]);
    out += ',';
    if (!truth.split_b.empty()) out += fmt_double(truth.split_b[d]);
    out += '\n';
  }
  return out;
}

json cell_sidecar(const CellResult& cell) {
  long deaths = 0;
  for (const auto& rep : cell.reps) deaths += rep.died ? 1 : 0;
  json j;
  j["algorithm"] = cell.algorithm;
  j["mn"] = cell.mn;
  j["m"] = cell.m;
  j["n"] = cell.n;
  j["repetitions"] = cell.reps.size();
  j["deaths"] = deaths;
  j["completed"] = (long)cell.reps.size() - deaths;
  j["wall_s"] = cell.wall_s;
  return j;
}

json base_sidecar(const std::string& experiment, const json& cfg,
                  uint64_t seed, int threads) {
  json j;
  j["experiment"] = experiment;
  j["schema_version"] = 1;
  j["version"] = kVersion;
  j["git_hash"] = UDSMC_GIT_HASH;
  j["threads"] = threads;
  j["effective_seed"] = seed;
  j["config"] = cfg;
  return j;
}

void write_sidecar(const fs::path& dir, json& j, double wall_s) {
  j["wall_s_total"] = wall_s;
  write_text_file(dir / "run.json", j.dump(2) + "\n");
}

bool all_runs_died(const std::vector<CellResult>& cells) {
  for (const auto& cell : cells)
    for (const auto& rep : cell.reps)
      if (!rep.died) return false;
  return true;
}

// --- experiment drivers ------------------------------------------------------

uint64_t effective_seed(const json& cfg, std::optional<uint64_t> over) {
  if (over) return *over;
  long s = opt_int(cfg, "seed", 1);
  require(s >= 0, errc::invalid_argument, "seed must be nonnegative");
  return (uint64_t)s;
}

ModelBundle bundle_of(const json& cfg, const std::string& base_dir) {
  const json* model = find(cfg, "model");
  if (!model) fail(errc::parse_error, "missing field 'model'");
  const json* stats = find(cfg, "statistics");
  return build_bundle(model->dump(), stats ? stats->dump() : "", base_dir);
}

void run_variance(const json& cfg, const fs::path& dir, int threads,
                  std::optional<uint64_t> seed_override,
                  const std::string& base_dir) {
  check_keys(cfg,
             {"experiment", "model", "statistics", "mn", "m_values",
              "repetitions", "seed"},
             "variance config");
  auto t0 = steady::now();
  ModelBundle b = bundle_of(cfg, base_dir);
  uint64_t seed = effective_seed(cfg, seed_override);
  long mn = need_int(cfg, "mn");
  require(mn >= 1, errc::invalid_argument, "mn must be >= 1");
  const json* mv = find(cfg, "m_values");
  if (!mv || !mv->is_array() || mv->empty())
    fail(errc::parse_error, "m_values: expected a nonempty array");
  std::vector<long> m_values;
  for (const auto& e : *mv) {
    long m = int_of(e, "m_values");
    require(m >= 1, errc::invalid_argument, "m_values entries must be >= 1");
    require(mn % m == 0, errc::invalid_argument,
            "every m in m_values must divide mn");
    m_values.push_back(m);
  }
  long reps = need_int(cfg, "repetitions");
  require(reps >= 1, errc::invalid_argument, "repetitions must be >= 1");

  std::vector<CellResult> cells;
  cells.reserve(m_values.size());
  for (long m : m_values)
    cells.push_back(run_updown_cell(b, mn / m, m, reps, seed, threads));

  write_text_file(dir / "results.csv", results_csv("variance", cells, b));
  write_text_file(dir / "summary.csv", summary_csv("variance", cells, b));
  json side = base_sidecar("variance", cfg, seed, threads);
  side["files"] = {"results.csv", "summary.csv"};
  side["cells"] = json::array();
  for (const auto& c : cells) side["cells"].push_back(cell_sidecar(c));
  write_sidecar(dir, side, seconds_since(t0));
  require(!all_runs_died(cells), errc::all_particles_dead,
          "every repetition died; outputs contain only death records");
}

void run_converge(const json& cfg, const fs::path& dir, int threads,
                  std::optional<uint64_t> seed_override,
                  const std::string& base_dir) {
  check_keys(cfg,
             {"experiment", "model", "statistics", "m", "n_values",
              "repetitions", "seed", "baseline", "truth"},
             "converge config");
  auto t0 = steady::now();
  ModelBundle b = bundle_of(cfg, base_dir);
  uint64_t seed = effective_seed(cfg, seed_override);
  long m = opt_int(cfg, "m", 20);
  require(m >= 1, errc::invalid_argument, "m must be >= 1");
  const json* nv = find(cfg, "n_values");
  if (!nv || !nv->is_array() || nv->empty())
    fail(errc::parse_error, "n_values: expected a nonempty array");
  std::vector<long> n_values;
  for (const auto& e : *nv) {
    long n = int_of(e, "n_values");
    require(n >= 1, errc::invalid_argument, "n_values entries must be >= 1");
    n_values.push_back(n);
  }
  long reps = need_int(cfg, "repetitions");
  require(reps >= 1, errc::invalid_argument, "repetitions must be >= 1");
  bool baseline = opt_bool(cfg, "baseline", true);

  auto t_truth = steady::now();
  TruthOut truth = compute_truth(find(cfg, "truth"), b, seed);
  double truth_s = seconds_since(t_truth);

  std::vector<CellResult> cells;
  for (long n : n_values) {
    cells.push_back(run_updown_cell(b, n, m, reps, seed, threads));
    if (baseline)
      cells.push_back(run_importance_cell(b, n, m, reps, seed, threads));
  }

  write_text_file(dir / "results.csv", results_csv("converge", cells, b));
  write_text_file(dir / "summary.csv", summary_csv("converge", cells, b));
  write_text_file(dir / "rmse.csv", rmse_csv("converge", cells, b, truth));
  write_text_file(dir / "truth.csv", truth_csv(b, truth));
  json side = base_sidecar("converge", cfg, seed, threads);
  side["files"] = {"results.csv", "summary.csv", "rmse.csv", "truth.csv"};
  side["truth"] = truth.info;
  side["truth"]["kind"] = truth.kind;
  side["truth"]["wall_s"] = truth_s;
  side["cells"] = json::array();
  for (const auto& c : cells) side["cells"].push_back(cell_sidecar(c));
  write_sidecar(dir, side, seconds_since(t0));
  require(!all_runs_died(cells), errc::all_particles_dead,
          "every repetition died; outputs contain only death records");
}

void run_profile(const json& cfg, const fs::path& dir, int threads,
                 std::optional<uint64_t> seed_override,
                 const std::string& base_dir) {
  check_keys(cfg,
             {"experiment", "model", "n", "m", "seed", "radius",
              "include_segment", "positions"},
             "profile config");
  auto t0 = steady::now();
  const json* model = find(cfg, "model");
  if (!model) fail(errc::parse_error, "missing field 'model'");
  json stat;
  stat["kind"] = "contacts";
  stat["name"] = "contacts";
  stat["radius"] = opt_num(cfg, "radius", 7.0);
  stat["include_segment"] = opt_bool(cfg, "include_segment", true);
  if (const json* pos = find(cfg, "positions")) stat["residues"] = *pos;
  json stats = json::array({stat});
  ModelBundle b = build_bundle(model->dump(), stats.dump(), base_dir);
  uint64_t seed = effective_seed(cfg, seed_override);
  long n = need_int(cfg, "n");
  long m = need_int(cfg, "m");
  require(n >= 1 && m >= 1, errc::invalid_argument, "n and m must be >= 1");

  RunResult run =
      run_updown_smc(*b.model, n, m, rep_seed(seed, kAlgoUpdown, m, n, 0),
                     threads);

  json side = base_sidecar("profile", cfg, seed, threads);
  side["files"] = {"profile.csv"};
  side["diagnostics"] = json::parse(run.diag.to_json());
  if (run.diag.died) {
    write_sidecar(dir, side, seconds_since(t0));
    throw Error(errc::all_particles_dead,
                "the profile run died before the horizon")
        .with_detail(run.diag.died_at);
  }

  std::vector<double> values = flatten_estimates(b, run.ensemble);
  EstimateReport rep = estimate(run.ensemble, *b.stats[0]);
  std::string out = "position,statistic,value\n";
  const StatSpec& spec = b.specs[0];
  for (size_t d = 0; d < values.size(); ++d) {
    append_int(out, spec.residues[d]);
    out += ',';
    out += spec.name;
    out += ',';
    out += fmt_double(values[d]);
    out += '\n';
  }
  write_text_file(dir / "profile.csv", out);
  side["estimate"] = {{"n_particles", rep.n_particles},
                      {"n_distinct", rep.n_distinct},
                      {"weight_entropy", rep.weight_entropy}};
  write_sidecar(dir, side, seconds_since(t0));
}

}  // namespace

void run_experiment_config(const std::string& config_text,
                           const std::string& out_dir, int threads,
                           std::optional<uint64_t> seed_override,
                           const std::string& base_dir) {
  json cfg = jsonu::parse(config_text, "experiment config");
  if (!cfg.is_object())
    fail(errc::parse_error, "experiment config: expected a JSON object");
  std::string kind = need_str(cfg, "experiment");
  fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(errc::io_error, "cannot create " + out_dir + ": " + ec.message());

  if (kind == "variance")
    run_variance(cfg, dir, threads, seed_override, base_dir);
  else if (kind == "converge")
    run_converge(cfg, dir, threads, seed_override, base_dir);
  else if (kind == "profile")
    run_profile(cfg, dir, threads, seed_override, base_dir);
  else
    fail(errc::invalid_argument, "unknown experiment '" + kind + "'");
}

void generate_tables_config(const std::string& config_text, uint64_t seed,
                            const std::string& out_dir) {
  json cfg = config_text.empty() ? json::object()
                                 : jsonu::parse(config_text, "generator config");
  if (!cfg.is_object())
    fail(errc::parse_error, "generator config: expected a JSON object");
  check_keys(cfg,
             {"atom_types", "bin_width", "max_distance", "clash_distance",
              "sentinel", "well_depth", "amino_acids", "modes", "mode_sd_deg",
              "omega_mean", "omega_sd", "max_steps", "span_margin", "host"},
             "generator config");

  auto str_list = [](const json& j, const char* key,
                     std::vector<std::string> dflt) {
    const json* v = find(j, key);
    if (!v) return dflt;
    if (!v->is_array() || v->empty())
      fail(errc::parse_error,
           std::string(key) + ": expected a nonempty array of strings");
    std::vector<std::string> out;
    for (const auto& e : *v) {
      if (!e.is_string())
        fail(errc::parse_error,
             std::string(key) + ": expected a nonempty array of strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  };

  SyntheticSpec spec;
  spec.atom_types = str_list(cfg, "atom_types", spec.atom_types);
  spec.bin_width = opt_num(cfg, "bin_width", spec.bin_width);
  spec.max_distance = opt_num(cfg, "max_distance", spec.max_distance);
  spec.clash_distance = opt_num(cfg, "clash_distance", spec.clash_distance);
  spec.sentinel = opt_num(cfg, "sentinel", spec.sentinel);
  spec.well_depth = opt_num(cfg, "well_depth", spec.well_depth);
  spec.amino_acids = str_list(cfg, "amino_acids", spec.amino_acids);
  spec.modes = (int)opt_int(cfg, "modes", spec.modes);
  spec.mode_sd_deg = opt_num(cfg, "mode_sd_deg", spec.mode_sd_deg);
  spec.omega_mean = opt_num(cfg, "omega_mean", spec.omega_mean);
  spec.omega_sd = opt_num(cfg, "omega_sd", spec.omega_sd);
  spec.max_steps = (int)opt_int(cfg, "max_steps", spec.max_steps);
  spec.span_margin = opt_num(cfg, "span_margin", spec.span_margin);

  HostSpec host;
  host.amino_acids = spec.amino_acids;
  if (const json* h = find(cfg, "host")) {
    check_keys(*h, {"residues", "phi", "psi", "omega", "amino_acids", "chain"},
               "host config");
    host.residues = (int)opt_int(*h, "residues", host.residues);
    host.conformation.phi = opt_num(*h, "phi", host.conformation.phi);
    host.conformation.psi = opt_num(*h, "psi", host.conformation.psi);
    host.conformation.omega = opt_num(*h, "omega", host.conformation.omega);
    host.amino_acids = str_list(*h, "amino_acids", host.amino_acids);
    std::string chain = opt_str(*h, "chain", std::string(1, host.chain));
    require(chain.size() == 1, errc::invalid_argument,
            "host chain must be a single character");
    host.chain = chain[0];
  }

  SyntheticTables tables = generate_synthetic_tables(spec, seed);
  ProteinStructure host_structure =
      generate_synthetic_host(host, spec.geometry);

  fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(errc::io_error, "cannot create " + out_dir + ": " + ec.message());
  save_potential_table_file(tables.pot, (dir / "potential.tbl").string());
  save_dihedral_set_file(tables.dih, (dir / "dihedrals.tbl").string());
  save_closure_table_file(tables.clo, (dir / "closure.tbl").string());
  write_pdb_file(host_structure, (dir / "host.pdb").string());

  json side;
  side["schema_version"] = 1;
  side["version"] = kVersion;
  side["git_hash"] = UDSMC_GIT_HASH;
  side["seed"] = seed;
  side["config"] = cfg;
  side["files"] = {"potential.tbl", "dihedrals.tbl", "closure.tbl", "host.pdb"};
  write_text_file(dir / "gen.json", side.dump(2) + "\n");
}

}  // namespace udsmc
