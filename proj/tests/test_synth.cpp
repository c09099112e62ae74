#include <doctest.h>

#include <cmath>

#include "fembv/diagnostics.hpp"
#include "fembv/exceptions.hpp"
#include "fembv/gpd.hpp"
#include "fembv/synth.hpp"
#include "fembv/switching.hpp"
#include "test_util.hpp"

using namespace fembv;

namespace {

SynthScenario flat_scenario(double xi, double sigma, std::size_t S, std::size_t T,
                            std::uint64_t seed) {
  SynthScenario sc;
  sc.S = S;
  sc.T = T;
  sc.K = 1;
  sc.switches_per_location = 0;
  sc.seed = seed;
  sc.theta = RegimeParameters::zeros(1, 0);
  sc.theta.xi_coeffs(0)[0] = xi;
  sc.theta.sigma_coeffs(0)[0] = sigma;
  return sc;
}

}  // namespace

TEST_CASE("unit-exponential generation has mean near one") {
  const SynthData data = gen_panel(flat_scenario(0.0, 1.0, 4, 25000, 7));
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& e : data.panel.excesses) {
    for (const double y : e) {
      CHECK(y > 0.0);
      sum += y;
    }
    n += e.size();
  }
  const double mean = sum / static_cast<double>(n);
  const double se = 1.0 / std::sqrt(static_cast<double>(n));  // Exp(1) sd is 1
  CHECK(std::abs(mean - 1.0) < 3.0 * se);
}

TEST_CASE("two-regime generation separates the scale offsets") {
  const SynthData data = gen_panel(default_recovery_scenario(13));
  double sum[2] = {0, 0};
  std::size_t count[2] = {0, 0};
  for (std::size_t s = 0; s < data.panel.n_locations(); ++s) {
    for (std::size_t j = 0; j < data.panel.length(s); ++j) {
      const int k = data.truth.labels[s][j];
      sum[k] += data.panel.excesses[s][j];
      ++count[k];
    }
  }
  REQUIRE(count[0] > 100);
  REQUIRE(count[1] > 100);
  const double mean0 = sum[0] / static_cast<double>(count[0]);
  const double mean1 = sum[1] / static_cast<double>(count[1]);
  // regime 0: sigma in [1, 1.5], xi = 0.1; regime 1: sigma in [8, 9], xi = -0.1
  CHECK(mean0 < 2.5);
  CHECK(mean1 > 5.0);
}

TEST_CASE("generated paths use exactly the requested switch count") {
  for (const int switches : {0, 3, 6, 11}) {
    SynthScenario sc = default_recovery_scenario(switches * 10 + 1);
    sc.switches_per_location = switches;
    const SynthData data = gen_panel(sc);
    for (const auto& labels : data.truth.labels)
      CHECK(switch_count(labels) == switches);
  }
}

TEST_CASE("generated covariates are aligned, scaled and named") {
  const SynthData data = gen_panel(noise_covariate_scenario(4));
  CHECK(data.covariates.names == std::vector<std::string>{"season", "noise"});
  CHECK(data.covariates.scaled);
  for (std::size_t s = 0; s < data.panel.n_locations(); ++s) {
    CHECK(data.covariates.times[s] == data.panel.times[s]);
    for (const double v : data.covariates.values[s]) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);  // both covariates are local
    }
  }
}

TEST_CASE("K=1 samples pass a KS test against the generating distribution") {
  int passes = 0;
  const int seeds = 20;
  for (int seed = 0; seed < seeds; ++seed) {
    const GpdPoint truth{0.15, 2.5};
    SynthScenario sc = flat_scenario(truth.xi, truth.sigma, 1, 5000,
                                     static_cast<std::uint64_t>(seed) + 100);
    const SynthData data = gen_panel(sc);
    const double d = ks_statistic(data.panel.excesses[0], [&](double y) {
      return gpd_cdf(y, truth);
    });
    if (d < testutil::ks_critical(0.01, 5000)) ++passes;
  }
  CHECK(passes >= 19);  // >= 95% of seeds
}

TEST_CASE("gen_panel validates its scenario") {
  SynthScenario sc = default_recovery_scenario(1);
  sc.theta = RegimeParameters::zeros(3, 1);  // K mismatch
  CHECK_THROWS_AS(gen_panel(sc), ValidationError);
  SynthScenario empty = default_recovery_scenario(1);
  empty.S = 0;
  CHECK_THROWS_AS(gen_panel(empty), ValidationError);
}
