#include "udsmc.h"

#include <cstring>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "json_util.hpp"
#include "udsmc/errors.hpp"
#include "udsmc/experiments.hpp"
#include "udsmc/model_factory.hpp"
#include "udsmc/smc.hpp"
#include "udsmc/toy_models.hpp"
#include "udsmc/version.hpp"

using namespace udsmc;

struct udsmc_model {
  std::shared_ptr<const ModelBundle> bundle;
};

struct udsmc_run {
  std::shared_ptr<const ModelBundle> bundle;
  RunResult result;
};

namespace {

thread_local std::string g_error;
thread_local long g_error_detail = -1;

void clear_error() {
  g_error.clear();
  g_error_detail = -1;
}

// Runs f under the exception barrier; nothing may throw across the C
// boundary.
template <typename F>
udsmc_status guarded(F&& f) {
  try {
    clear_error();
    f();
    return UDSMC_OK;
  } catch (const Error& e) {
    g_error = e.what();
    g_error_detail = e.detail();
    return (udsmc_status)(int)e.code();
  } catch (const std::bad_alloc&) {
    g_error = "out of memory";
    return UDSMC_E_INTERNAL;
  } catch (const std::exception& e) {
    g_error = e.what();
    return UDSMC_E_INTERNAL;
  } catch (...) {
    g_error = "unknown failure";
    return UDSMC_E_INTERNAL;
  }
}

const char* nonnull(const char* s) { return s ? s : ""; }

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

nlohmann::json estimate_json(const ModelBundle& b,
                             const ParticleEnsemble& ens) {
  nlohmann::json values = nlohmann::json::object();
  long n_particles = 0, n_distinct = 0;
  double entropy = 0.0;
  for (size_t i = 0; i < b.stats.size(); ++i) {
    EstimateReport rep = estimate(ens, *b.stats[i]);
    n_particles = rep.n_particles;
    n_distinct = rep.n_distinct;
    entropy = rep.weight_entropy;
    for (size_t d = 0; d < b.dim_map.size(); ++d)
      if (b.dim_map[d].first == i)
        values[b.dim_names[d]] = rep.value[b.dim_map[d].second];
  }
  nlohmann::json j;
  j["values"] = std::move(values);
  j["n_particles"] = n_particles;
  j["n_distinct"] = n_distinct;
  j["weight_entropy"] = entropy;
  return j;
}

}  // namespace

extern "C" {

const char* udsmc_version(void) { return kVersion; }

const char* udsmc_status_name(udsmc_status s) {
  return errc_name((errc)(int)s);
}

const char* udsmc_last_error(void) { return g_error.c_str(); }

long udsmc_last_error_detail(void) { return g_error_detail; }

void udsmc_string_free(char* s) { delete[] s; }

udsmc_status udsmc_model_create(const char* model_json,
                                const char* statistics_json,
                                const char* base_dir,
                                udsmc_model** out_model) {
  return guarded([&] {
    require(model_json != nullptr && out_model != nullptr,
            errc::invalid_argument, "model_json and out_model are required");
    *out_model = nullptr;
    auto bundle = std::make_shared<ModelBundle>(build_bundle(
        model_json, nonnull(statistics_json), nonnull(base_dir)));
    *out_model = new udsmc_model{std::move(bundle)};
  });
}

void udsmc_model_free(udsmc_model* model) { delete model; }

int udsmc_model_horizon(const udsmc_model* model) {
  return model ? model->bundle->model->horizon() : -1;
}

int udsmc_model_state_dim(const udsmc_model* model) {
  return model ? model->bundle->model->state_dim() : -1;
}

udsmc_status udsmc_run_updown(const udsmc_model* model, long n, long m,
                              uint64_t seed, int threads,
                              udsmc_run** out_run) {
  return guarded([&] {
    require(model != nullptr && out_run != nullptr, errc::invalid_argument,
            "model and out_run are required");
    *out_run = nullptr;
    RunResult r = run_updown_smc(*model->bundle->model, n, m, seed, threads);
    *out_run = new udsmc_run{model->bundle, std::move(r)};
  });
}

udsmc_status udsmc_run_sisr(const udsmc_model* model, long n,
                            const char* scheme, uint64_t seed,
                            udsmc_run** out_run) {
  return guarded([&] {
    require(model != nullptr && out_run != nullptr, errc::invalid_argument,
            "model and out_run are required");
    *out_run = nullptr;
    ResampleScheme s = resample_scheme_from_name(nonnull(scheme));
    RunResult r = run_sisr(*model->bundle->model, n, s, seed, 1);
    *out_run = new udsmc_run{model->bundle, std::move(r)};
  });
}

udsmc_status udsmc_run_importance(const udsmc_model* model, long n_target,
                                  long long max_draws, long long max_proposals,
                                  uint64_t seed, udsmc_run** out_run) {
  return guarded([&] {
    require(model != nullptr && out_run != nullptr, errc::invalid_argument,
            "model and out_run are required");
    *out_run = nullptr;
    RunResult r = run_importance_sampling(*model->bundle->model, n_target,
                                          max_draws, max_proposals, seed);
    *out_run = new udsmc_run{model->bundle, std::move(r)};
  });
}

void udsmc_run_free(udsmc_run* run) { delete run; }

int udsmc_run_died(const udsmc_run* run) {
  return run && run->result.diag.died ? 1 : 0;
}

udsmc_status udsmc_run_diagnostics(const udsmc_run* run, char** out_json) {
  return guarded([&] {
    require(run != nullptr && out_json != nullptr, errc::invalid_argument,
            "run and out_json are required");
    *out_json = dup_string(run->result.diag.to_json());
  });
}

udsmc_status udsmc_run_estimate(const udsmc_run* run, char** out_json) {
  return guarded([&] {
    require(run != nullptr && out_json != nullptr, errc::invalid_argument,
            "run and out_json are required");
    *out_json = nullptr;
    nlohmann::json j = estimate_json(*run->bundle, run->result.ensemble);
    *out_json = dup_string(j.dump());
  });
}

udsmc_status udsmc_enumerate_exact(const udsmc_model* model, char** out_json) {
  return guarded([&] {
    require(model != nullptr && out_json != nullptr, errc::invalid_argument,
            "model and out_json are required");
    *out_json = nullptr;
    const ModelBundle& b = *model->bundle;
    require(b.enumerable != nullptr, errc::oracle_unavailable,
            "enumeration requires a finite-state model");
    nlohmann::json values = nlohmann::json::object();
    for (size_t i = 0; i < b.stats.size(); ++i) {
      std::vector<double> v = enumerate_exact(*b.enumerable, *b.stats[i]);
      for (size_t d = 0; d < b.dim_map.size(); ++d)
        if (b.dim_map[d].first == i)
          values[b.dim_names[d]] = v[b.dim_map[d].second];
    }
    nlohmann::json j;
    j["values"] = std::move(values);
    *out_json = dup_string(j.dump());
  });
}

udsmc_status udsmc_experiment_run(const char* kind, const char* config_json,
                                  const char* out_dir, int threads,
                                  int64_t seed_override,
                                  const char* base_dir) {
  return guarded([&] {
    require(kind != nullptr && config_json != nullptr && out_dir != nullptr,
            errc::invalid_argument,
            "kind, config_json, and out_dir are required");
    nlohmann::json cfg = jsonu::parse(config_json, "experiment config");
    if (!cfg.is_object())
      fail(errc::parse_error, "experiment config: expected a JSON object");
    std::string want(kind);
    std::string have = jsonu::opt_str(cfg, "experiment", want);
    require(have == want, errc::invalid_argument,
            "config experiment '" + have + "' does not match '" + want + "'");
    cfg["experiment"] = want;
    std::optional<uint64_t> over;
    if (seed_override >= 0) over = (uint64_t)seed_override;
    run_experiment_config(cfg.dump(), out_dir, threads, over,
                          nonnull(base_dir));
  });
}

udsmc_status udsmc_generate_tables(const char* config_json, uint64_t seed,
                                   const char* out_dir) {
  return guarded([&] {
    require(out_dir != nullptr, errc::invalid_argument, "out_dir is required");
    generate_tables_config(nonnull(config_json), seed, out_dir);
  });
}

}  // extern "C"
