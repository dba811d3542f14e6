#include <climits>
#include <cmath>
#include <cstring>
#include <limits>
#include <vector>

#include "doctest.h"
#include "udsmc/errors.hpp"
#include "udsmc/smc.hpp"
#include "udsmc/statistics.hpp"
#include "udsmc/toy_models.hpp"

using namespace udsmc;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Two states, horizon 2: 8 paths, every target sum done by hand.
//   g0 = (2, 1),  g = [[1, 3], [2, 1]],  total mass 37
//   E[x_2] = 19/37,  E[x_0+x_1+x_2] = 51/37,  P(x_2 = 0) = 18/37
FiniteHmm hand_hmm(bool uniform_proposal) {
  FiniteHmm::Tables t;
  t.states = 2;
  t.horizon = 2;
  t.init_target = {2.0, 1.0};
  t.trans_target = {1.0, 3.0, 2.0, 1.0};
  if (uniform_proposal) {
    t.init_proposal = {0.5, 0.5};
    t.trans_proposal = {0.5, 0.5, 0.5, 0.5};
  } else {
    t.init_proposal = {0.25, 0.75};
    t.trans_proposal = {0.4, 0.6, 0.7, 0.3};
  }
  return FiniteHmm(std::move(t));
}

double sum_increments(const SequentialModel& model,
                      const std::vector<double>& path) {
  double s = 0.0;
  for (size_t t = 0; t < path.size(); ++t) {
    std::span<const double> prefix{path.data(), t};
    std::span<const double> state{path.data() + t, 1};
    s += model.log_increment(prefix, (int)t, state);
  }
  return s;
}

// Dies at step 1 regardless of state.
struct DeadAtOne final : SequentialModel {
  int horizon() const override { return 3; }
  int state_dim() const override { return 1; }
  void propose(std::span<const double>, int, StreamRng& rng,
               std::span<double> out) const override {
    out[0] = rng.normal();
  }
  double log_increment(std::span<const double>, int t,
                       std::span<const double>) const override {
    return t == 0 ? 0.0 : kNegInf;
  }
};

}  // namespace

TEST_CASE("enumeration matches hand-summed expectations") {
  FiniteHmm model = hand_hmm(true);
  auto xt = make_terminal_value(1, 2);
  auto sx = make_path_sum(1, 2);
  auto eq0 = make_terminal_equals(1, 2, 0.0);
  CHECK(enumerate_exact(model, *xt)[0] ==
        doctest::Approx(19.0 / 37.0).epsilon(1e-12));
  CHECK(enumerate_exact(model, *sx)[0] ==
        doctest::Approx(51.0 / 37.0).epsilon(1e-12));
  CHECK(enumerate_exact(model, *eq0)[0] ==
        doctest::Approx(18.0 / 37.0).epsilon(1e-12));
}

TEST_CASE("log_mass is the raw target product") {
  FiniteHmm model = hand_hmm(true);
  std::vector<double> path{0.0, 1.0, 0.0};  // 2 * 3 * 2 = 12
  CHECK(model.log_mass(path) == doctest::Approx(std::log(12.0)).epsilon(1e-12));
  std::vector<double> ones{1.0, 1.0, 1.0};  // 1 * 1 * 1
  CHECK(model.log_mass(ones) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("increments telescope to mass over proposal") {
  // Uniform proposal: q(path) = 1/8 for every path, so the telescoped sum
  // exceeds log_mass by exactly 3 log 2.
  FiniteHmm uni = hand_hmm(true);
  for (int code = 0; code < 8; ++code) {
    std::vector<double> path{(double)(code & 1), (double)((code >> 1) & 1),
                             (double)((code >> 2) & 1)};
    CHECK(sum_increments(uni, path) - uni.log_mass(path) ==
          doctest::Approx(3.0 * std::log(2.0)).epsilon(1e-12));
  }
  // Skewed proposal: q(0,1,0) = 0.25 * 0.6 * 0.7.
  FiniteHmm skew = hand_hmm(false);
  std::vector<double> path{0.0, 1.0, 0.0};
  CHECK(sum_increments(skew, path) ==
        doctest::Approx(std::log(12.0) - std::log(0.25 * 0.6 * 0.7))
            .epsilon(1e-12));
}

TEST_CASE("single-state enumeration is an identity") {
  FiniteHmm::Tables t;
  t.states = 1;
  t.horizon = 3;
  t.init_target = {5.0};
  t.init_proposal = {1.0};
  t.trans_target = {7.0};
  t.trans_proposal = {1.0};
  t.state_values = {2.5};
  FiniteHmm model(std::move(t));
  CHECK(enumerate_exact(model, *make_terminal_value(1, 3))[0] ==
        doctest::Approx(2.5).epsilon(1e-12));
  CHECK(enumerate_exact(model, *make_path_sum(1, 3))[0] ==
        doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("uniform potentials give uniform terminal marginals") {
  FiniteHmm::Tables t;
  t.states = 3;
  t.horizon = 3;
  t.init_target = {1.0, 1.0, 1.0};
  t.init_proposal = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  t.trans_target.assign(9, 1.0);
  t.trans_proposal.assign(9, 1.0 / 3);
  FiniteHmm model(std::move(t));
  for (double k : {0.0, 1.0, 2.0})
    CHECK(enumerate_exact(model, *make_terminal_equals(1, 3, k))[0] ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("enumeration refuses oversized path spaces") {
  FiniteHmm model = hand_hmm(true);  // 8 paths
  auto xt = make_terminal_value(1, 2);
  CHECK_THROWS_AS(enumerate_exact(model, *xt, 7), Error);
  try {
    enumerate_exact(model, *xt, 7);
  } catch (const Error& e) {
    CHECK(e.code() == errc::too_large);
  }
}

TEST_CASE("upsample_step applies the weight recursion exactly") {
  FiniteHmm model = hand_hmm(false);
  ParticleEnsemble parents(1, 0, 3);
  parents.mutable_path(0)[0] = 0.0;
  parents.mutable_path(1)[0] = 1.0;
  parents.mutable_path(2)[0] = 0.0;
  parents.set_log_weight(0, std::log(0.5));
  parents.set_log_weight(1, std::log(0.3));
  parents.set_log_weight(2, std::log(0.2));
  parents.normalize();

  const long m = 4;
  const uint64_t seed = 99;
  UpsampledSet ups = upsample_step(parents, model, m, seed);
  REQUIRE(ups.size() == 12);
  CHECK(ups.step == 1);
  CHECK(ups.n_parents == 3);
  CHECK(ups.m_children == m);

  long positives = 0;
  for (long i = 0; i < ups.size(); ++i) {
    long parent = i / m;
    CHECK(ups.parent[(size_t)i] == (int32_t)parent);
    auto child = ups.path(i);
    REQUIRE(child.size() == 2);
    CHECK(child[0] == parents.path(parent)[0]);  // prefix copied verbatim

    // Candidate (parent, j) draws from its own keyed stream; replaying the
    // stream must reproduce the stored state bit for bit.
    StreamRng rng(seed, rng_role::proposal, 1, (uint64_t)i);
    double replay;
    model.propose(parents.path(parent), 1, rng, {&replay, 1});
    CHECK(child[1] == replay);

    double expect = parents.log_weight(parent) +
                    model.log_increment(parents.path(parent), 1, {&child[1], 1});
    CHECK(ups.log_weights[(size_t)i] == expect);
    if (ups.log_weights[(size_t)i] != kNegInf) ++positives;
  }
  CHECK(ups.positive == positives);

  // Thread count must not change a single bit.
  UpsampledSet par = upsample_step(parents, model, m, seed, 4);
  CHECK(par.paths == ups.paths);
  CHECK(par.log_weights == ups.log_weights);
}

TEST_CASE("upsample_step argument checks") {
  FiniteHmm model = hand_hmm(true);
  ParticleEnsemble raw(1, 0, 2);
  raw.set_log_weight(0, 0.0);
  raw.set_log_weight(1, 0.0);
  CHECK_THROWS_AS(upsample_step(raw, model, 2, 1), Error);  // not normalized
  raw.normalize();
  CHECK_THROWS_AS(upsample_step(raw, model, 0, 1), Error);  // m < 1
  ParticleEnsemble at_end(1, 2, 2);
  at_end.set_log_weight(0, 0.0);
  at_end.set_log_weight(1, 0.0);
  at_end.normalize();
  CHECK_THROWS_AS(upsample_step(at_end, model, 2, 1), Error);  // past horizon
}

TEST_CASE("runs report death honestly") {
  DeadAtOne model;
  RunResult ud = run_updown_smc(model, 10, 3, 7);
  CHECK(ud.diag.died);
  CHECK(ud.diag.died_at == 1);
  CHECK(ud.ensemble.size() == 0);
  CHECK(ud.diag.steps.size() == 2);  // step 0 survived, step 1 did not
  CHECK(ud.diag.steps[1].positive == 0);

  RunResult si = run_sisr(model, 10, ResampleScheme::stratified, 7);
  CHECK(si.diag.died);
  CHECK(si.diag.died_at == 1);

  RunResult is = run_importance_sampling(model, 10, 1000, 0, 7);
  CHECK(is.diag.died);
  CHECK(is.diag.positive_draws == 0);
  CHECK(is.diag.budget_exhausted);

  auto xt = make_terminal_value(1, 3);
  CHECK_THROWS_AS(estimate(ud.ensemble, *xt), Error);  // no mass to average
}

TEST_CASE("estimate is an exact weighted mean") {
  ParticleEnsemble ens(1, 0, 3);
  ens.mutable_path(0)[0] = 1.0;
  ens.mutable_path(1)[0] = 2.0;
  ens.mutable_path(2)[0] = 3.0;
  ens.set_log_weight(0, std::log(0.2));
  ens.set_log_weight(1, std::log(0.3));
  ens.set_log_weight(2, std::log(0.5));
  auto xt = make_terminal_value(1, 0);
  EstimateReport r = estimate(ens, *xt);
  CHECK(r.value[0] == doctest::Approx(2.3).epsilon(1e-12));
  CHECK(r.n_particles == 3);
  CHECK(r.n_distinct == 3);

  // Shifting every log-weight by a constant changes nothing.
  for (long i = 0; i < 3; ++i) ens.set_log_weight(i, ens.log_weight(i) + 7.0);
  CHECK(estimate(ens, *xt).value[0] == doctest::Approx(2.3).epsilon(1e-12));

  ens.mutable_path(1)[0] = 1.0;  // duplicate path
  CHECK(estimate(ens, *xt).n_distinct == 2);
}

TEST_CASE("all algorithms are unbiased against enumeration") {
  FiniteHmm model = FiniteHmm::propriety_reference();
  auto xt = make_terminal_value(1, model.horizon());
  auto sx = make_path_sum(1, model.horizon());
  auto eq = make_terminal_equals(1, model.horizon(), 1.0);
  const Statistic* stats[3] = {xt.get(), sx.get(), eq.get()};
  double exact[3];
  for (int s = 0; s < 3; ++s) exact[s] = enumerate_exact(model, *stats[s])[0];

  const long reps = 500;
  auto check_mean = [&](const std::string& label, auto&& runner) {
    double sum[3] = {0, 0, 0}, sum2[3] = {0, 0, 0};
    for (long r = 0; r < reps; ++r) {
      RunResult res = runner(mix64(2718, (uint64_t)r));
      REQUIRE_FALSE(res.diag.died);
      for (int s = 0; s < 3; ++s) {
        double v = estimate(res.ensemble, *stats[s]).value[0];
        sum[s] += v;
        sum2[s] += v * v;
      }
    }
    for (int s = 0; s < 3; ++s) {
      CAPTURE(label);
      CAPTURE(s);
      double mean = sum[s] / (double)reps;
      double var = (sum2[s] / (double)reps - mean * mean) *
                   (double)reps / (double)(reps - 1);
      double se = std::sqrt(var / (double)reps);
      REQUIRE(se > 0.0);
      CHECK(std::abs(mean - exact[s]) < 3.0 * se);
    }
  };

  check_mean("updown", [&](uint64_t s) {
    return run_updown_smc(model, 500, 5, s);
  });
  check_mean("sisr", [&](uint64_t s) {
    return run_sisr(model, 500, ResampleScheme::stratified, s);
  });
  check_mean("importance", [&](uint64_t s) {
    return run_importance_sampling(model, 500, 1000000, 0, s);
  });
}

TEST_CASE("m = 1 falls back to with-replacement selection") {
  ConstrainedChain tight = ConstrainedChain::tight_default();
  bool saw_multinomial = false, saw_optimal_m1 = false;
  for (uint64_t s = 0; s < 20; ++s) {
    RunResult res = run_updown_smc(tight, 50, 1, mix64(808, s));
    for (const auto& sd : res.diag.steps) {
      if (sd.route == DownsampleRoute::multinomial) saw_multinomial = true;
      if (sd.route == DownsampleRoute::optimal) saw_optimal_m1 = true;
      CHECK(sd.candidates == 50);
    }
  }
  // With m = 1 there are exactly n candidates, so the positives >= n branch
  // requires every candidate alive; any death forces the fallback.
  CHECK(saw_multinomial);
  CHECK_FALSE(saw_optimal_m1);

  bool saw_optimal_m5 = false;
  for (uint64_t s = 0; s < 20; ++s) {
    RunResult res = run_updown_smc(tight, 50, 5, mix64(808, s));
    for (const auto& sd : res.diag.steps)
      if (sd.route == DownsampleRoute::optimal) saw_optimal_m5 = true;
  }
  CHECK(saw_optimal_m5);
}

TEST_CASE("sisr diagnostics carry the scheme name") {
  FiniteHmm model = hand_hmm(true);
  RunResult res = run_sisr(model, 100, ResampleScheme::residual, 3);
  CHECK(res.diag.algorithm == "sisr-residual");
  REQUIRE(res.diag.steps.size() == 3);
  CHECK(res.diag.steps[0].route == DownsampleRoute::none);
  CHECK(res.diag.steps[1].route == DownsampleRoute::resample);
  CHECK(res.diag.steps[2].route == DownsampleRoute::resample);
}

TEST_CASE("importance sampling stops on its budgets") {
  ConstrainedChain open = ConstrainedChain::open_default();
  // Proposal cap: far too few proposals to reach the target count.
  RunResult capped = run_importance_sampling(open, 1000000, LLONG_MAX, 50, 11);
  CHECK(capped.diag.budget_exhausted);
  CHECK(capped.diag.proposals >= 50);  // stops after the draw in flight
  CHECK(capped.diag.proposals < 50 + open.horizon() + 1);
  // Draw cap.
  RunResult drawn = run_importance_sampling(open, 1000000, 7, 0, 11);
  CHECK(drawn.diag.draws == 7);
  CHECK(drawn.diag.budget_exhausted);
  // Satisfied target: every open-corridor draw is accepted.
  RunResult full = run_importance_sampling(open, 25, 1000000, 0, 11);
  CHECK_FALSE(full.diag.budget_exhausted);
  CHECK(full.diag.positive_draws == 25);
  CHECK(full.ensemble.size() == 25);
  CHECK(full.diag.acceptance_rate == 1.0);
}

TEST_CASE("tight closure makes plain importance sampling impractical") {
  ConstrainedChain tight = ConstrainedChain::tight_default();
  RunResult is = run_importance_sampling(tight, 200, LLONG_MAX, 2000000, 4242);
  CHECK(is.diag.acceptance_rate < 0.05);
  CHECK(is.diag.acceptance_rate > 0.0);
}

TEST_CASE("plain sequential resampling dies where two-step selection lives") {
  ConstrainedChain chain = ConstrainedChain::surrogate_default();
  int sisr_deaths = 0, updown_deaths = 0;
  for (uint64_t s = 0; s < 30; ++s) {
    uint64_t seed = mix64(777, s);
    if (run_sisr(chain, 1000, ResampleScheme::stratified, seed).diag.died)
      ++sisr_deaths;
    if (run_updown_smc(chain, 50, 20, seed).diag.died) ++updown_deaths;
  }
  CHECK(sisr_deaths >= 10);
  CHECK(updown_deaths == 0);
}

TEST_CASE("moderate child counts complete where m = 1 stalls") {
  ConstrainedChain chain = ConstrainedChain::surrogate_default();
  const long mn = 10000;
  int deaths_m1 = 0, deaths_m20 = 0;
  for (uint64_t s = 0; s < 20; ++s) {
    uint64_t seed = mix64(31337, s);
    if (run_updown_smc(chain, mn / 1, 1, seed).diag.died) ++deaths_m1;
    if (run_updown_smc(chain, mn / 20, 20, seed).diag.died) ++deaths_m20;
  }
  CHECK(deaths_m1 > deaths_m20);
  CHECK(deaths_m20 == 0);
}
