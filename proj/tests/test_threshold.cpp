#include <cmath>
#include <vector>

#include "doctest.h"
#include "udsmc/errors.hpp"
#include "udsmc/resample.hpp"
#include "udsmc/rng.hpp"

using namespace udsmc;

namespace {

double threshold_sum(const std::vector<double>& w, double c) {
  double s = 0.0;
  for (double x : w) s += std::min(c * x, 1.0);
  return s;
}

// Independent root-finder for sum_i min(c*w_i, 1) = n. The sum is continuous
// and nondecreasing in c and strictly increasing below the plateau, so when
// more than n weights are positive the root is unique and bisection on
// [0, 1/min_positive] converges to it.
double bisect_threshold(const std::vector<double>& w, long n) {
  double wmin = 0.0;
  for (double x : w)
    if (x > 0.0 && (wmin == 0.0 || x < wmin)) wmin = x;
  double lo = 0.0, hi = 1.0 / wmin;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (threshold_sum(w, mid) < (double)n ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("worked threshold examples") {
  {
    ThresholdSolution s = solve_threshold(std::vector<double>{0.5, 0.3, 0.2}, 2);
    CHECK(s.c == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(s.kept == 1);
    CHECK_FALSE(s.keep_all);
  }
  {
    ThresholdSolution s = solve_threshold(std::vector<double>{0.7, 0.2, 0.1}, 2);
    CHECK(s.c == doctest::Approx(10.0 / 3.0).epsilon(1e-12));
    CHECK(s.kept == 1);
    CHECK_FALSE(s.keep_all);
  }
  {
    std::vector<double> w(100, 0.01);
    ThresholdSolution s = solve_threshold(w, 10);
    CHECK(s.c == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(s.kept == 0);
    CHECK_FALSE(s.keep_all);
  }
}

TEST_CASE("exactly n positive weights reports keep_all") {
  ThresholdSolution s =
      solve_threshold(std::vector<double>{0.5, 0.25, 0.0, 0.25, 0.0}, 3);
  CHECK(s.keep_all);
  CHECK(s.kept == 3);
  CHECK(s.c == doctest::Approx(4.0).epsilon(1e-12));  // 1 / min positive
}

TEST_CASE("fewer than n positive weights fails") {
  std::vector<double> w{0.5, 0.5, 0.0, 0.0};
  CHECK_THROWS_AS(solve_threshold(w, 3), Error);
  try {
    solve_threshold(w, 3);
  } catch (const Error& e) {
    CHECK(e.code() == errc::too_few_positive);
  }
  CHECK_THROWS_AS(solve_threshold(w, 0), Error);  // n must be >= 1
}

TEST_CASE("negative or non-finite weights are rejected") {
  CHECK_THROWS_AS(solve_threshold(std::vector<double>{0.5, -0.1}, 1), Error);
  CHECK_THROWS_AS(
      solve_threshold(
          std::vector<double>{0.5, std::numeric_limits<double>::infinity()}, 1),
      Error);
  CHECK_THROWS_AS(
      solve_threshold(
          std::vector<double>{0.5, std::numeric_limits<double>::quiet_NaN()},
          1),
      Error);
}

TEST_CASE("boundary ties are kept") {
  // Keeping the two unit weights forces c = 1, putting both exactly on the
  // boundary c*w = 1; boundary candidates count as kept.
  ThresholdSolution s =
      solve_threshold(std::vector<double>{1.0, 1.0, 0.5, 0.5}, 3);
  CHECK(s.c == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.kept == 2);
  CHECK(threshold_sum({1.0, 1.0, 0.5, 0.5}, s.c) == doctest::Approx(3.0));
}

TEST_CASE("equal weights split evenly") {
  ThresholdSolution s = solve_threshold(std::vector<double>{1, 1, 1, 1}, 2);
  CHECK(s.c == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s.kept == 0);
  ThresholdSolution all = solve_threshold(std::vector<double>{1, 1, 1, 1}, 4);
  CHECK(all.keep_all);
  CHECK(all.c == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zero weights are ignored") {
  ThresholdSolution a = solve_threshold(std::vector<double>{0.5, 0.3, 0.2}, 2);
  ThresholdSolution b =
      solve_threshold(std::vector<double>{0.5, 0.0, 0.3, 0.0, 0.2, 0.0}, 2);
  CHECK(a.c == b.c);
  CHECK(a.kept == b.kept);
  CHECK(a.keep_all == b.keep_all);
}

TEST_CASE("solution satisfies the defining identity on random vectors") {
  StreamRng rng(90210);
  for (int rep = 0; rep < 300; ++rep) {
    size_t k = 2 + rng.index(200);
    std::vector<double> w(k);
    // Heavy spread so some weights dominate: exp(6 * normal).
    for (double& x : w) x = std::exp(6.0 * rng.normal());
    long n = 1 + (long)rng.index(k);
    ThresholdSolution s = solve_threshold(w, n);
    double sum = threshold_sum(w, s.c);
    CHECK(std::abs(sum - (double)n) <= 1e-9 * (double)n);
    long kept = 0;
    for (double x : w)
      if (s.c * x >= 1.0) ++kept;
    CHECK(s.kept == kept);
    CHECK(s.kept <= n);
    CHECK(s.keep_all == (n == (long)k));
  }
}

TEST_CASE("scan agrees with an independent bisection") {
  StreamRng rng(411);
  for (int rep = 0; rep < 100; ++rep) {
    size_t k = 5 + rng.index(100);
    std::vector<double> w(k);
    for (double& x : w) x = std::exp(4.0 * rng.normal());
    long n = 1 + (long)rng.index(k - 1);  // strictly fewer than the positives
    double c = solve_threshold(w, n).c;
    double oracle = bisect_threshold(w, n);
    CHECK(c == doctest::Approx(oracle).epsilon(1e-9));
  }
}

TEST_CASE("threshold scales inversely with the weights") {
  std::vector<double> w{0.9, 0.4, 0.15, 0.05, 0.01, 0.8, 0.3};
  std::vector<double> scaled;
  for (double x : w) scaled.push_back(1000.0 * x);
  for (long n = 1; n <= (long)w.size(); ++n) {
    ThresholdSolution a = solve_threshold(w, n);
    ThresholdSolution b = solve_threshold(scaled, n);
    CHECK(b.c == doctest::Approx(a.c / 1000.0).epsilon(1e-12));
    CHECK(a.kept == b.kept);
    CHECK(a.keep_all == b.keep_all);
  }
}
