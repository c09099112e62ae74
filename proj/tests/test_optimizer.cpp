#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fembv/exceptions.hpp"
#include "fembv/gpd.hpp"
#include "fembv/optimizer.hpp"
#include "fembv/synth.hpp"
#include "test_util.hpp"

using namespace fembv;

TEST_CASE("gamma_step hand cases") {
  const auto loss = testutil::make_loss({{0, 1}, {0, 1}, {1, 0}, {1, 0}});
  SUBCASE("one switch reaches the zero-cost path") {
    const auto result = gamma_step(loss, 1);
    CHECK(result.labels == std::vector<int>{0, 0, 1, 1});
    CHECK(result.cost == 0.0);
  }
  SUBCASE("zero budget ties break to the lower label") {
    const auto result = gamma_step(loss, 0);
    CHECK(result.labels == std::vector<int>{0, 0, 0, 0});
    CHECK(result.cost == 2.0);
  }
  SUBCASE("a loose budget reduces to the per-row argmin") {
    const auto result = gamma_step(loss, 3);
    CHECK(result.labels == std::vector<int>{0, 0, 1, 1});
    CHECK(result.cost == 0.0);
    const auto loose = gamma_step(testutil::make_loss({{2, 1}, {0, 3}, {5, 4}}), 2);
    CHECK(loose.labels == std::vector<int>{1, 0, 1});
  }
}

TEST_CASE("gamma_step rejects a row with no finite entry") {
  auto loss = testutil::make_loss({{0, 1}, {kInf, kInf}, {1, 0}});
  CHECK_THROWS_AS(gamma_step(loss, 2), InfeasiblePointError);
  try {
    gamma_step(loss, 2);
  } catch (const InfeasiblePointError& e) {
    CHECK(e.location == "test");
    CHECK(e.time == 2);
  }
}

TEST_CASE("gamma_step equals exhaustive enumeration") {
  Rng rng(2025);
  for (int trial = 0; trial < 120; ++trial) {
    const std::size_t T = 1 + static_cast<std::size_t>(rng.uniform_int(0, 5));
    const std::size_t K = 1 + static_cast<std::size_t>(rng.uniform_int(0, 2));
    const int C = static_cast<int>(rng.uniform_int(0, 4));
    std::vector<std::vector<double>> rows(T, std::vector<double>(K));
    for (auto& row : rows) {
      for (auto& cell : row)
        cell = rng.uniform01() < 0.1 ? kInf : rng.uniform(0.0, 1.0);
      if (std::none_of(row.begin(), row.end(),
                       [](double v) { return std::isfinite(v); }))
        row[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(K) - 1))] =
            rng.uniform01();
    }
    const auto loss = testutil::make_loss(rows);
    const auto dp = gamma_step(loss, C);
    const auto brute = testutil::brute_force_best_path(loss, C);
    CHECK(dp.cost == brute.cost);
    CHECK(dp.labels == brute.labels);
    CHECK(switch_count(dp.labels) <= C);
  }
}

TEST_CASE("gamma_step is equivariant under a column permutation") {
  Rng rng(606);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t T = 2 + static_cast<std::size_t>(rng.uniform_int(0, 6));
    const std::size_t K = 3;
    std::vector<std::vector<double>> rows(T, std::vector<double>(K));
    for (auto& row : rows)
      for (auto& cell : row) cell = rng.uniform(0.0, 1.0);  // continuous: no ties
    const int C = static_cast<int>(rng.uniform_int(0, 3));

    const int perm[3] = {2, 0, 1};
    std::vector<std::vector<double>> permuted(T, std::vector<double>(K));
    for (std::size_t j = 0; j < T; ++j)
      for (std::size_t k = 0; k < K; ++k) permuted[j][perm[k]] = rows[j][k];

    const auto base = gamma_step(testutil::make_loss(rows), C);
    const auto mapped = gamma_step(testutil::make_loss(permuted), C);
    CHECK(base.cost == doctest::Approx(mapped.cost).epsilon(1e-15));
    for (std::size_t j = 0; j < T; ++j)
      CHECK(mapped.labels[j] == perm[base.labels[j]]);
  }
}

TEST_CASE("random_feasible_path honors the constraints") {
  Rng rng(11);
  SUBCASE("K=1 gives the constant zero path") {
    const auto path = random_feasible_path(10, 1, 5, rng);
    CHECK(path == std::vector<int>(10, 0));
  }
  SUBCASE("C=0 gives a constant path") {
    for (int i = 0; i < 50; ++i) {
      const auto path = random_feasible_path(20, 3, 0, rng);
      CHECK(switch_count(path) == 0);
    }
  }
  SUBCASE("draws satisfy the switch budget") {
    int max_seen = 0;
    for (int i = 0; i < 10000; ++i) {
      const auto path = random_feasible_path(100, 2, 20, rng);
      const int sc = switch_count(path);
      CHECK(sc <= 20);
      max_seen = std::max(max_seen, sc);
    }
    CHECK(max_seen == 20);  // the full budget is actually explored
  }
  SUBCASE("labels stay in range and adjacent segments differ") {
    for (int i = 0; i < 200; ++i) {
      const auto path = random_path_with_switches(30, 4, 7, rng);
      CHECK(switch_count(path) == 7);
      for (const int l : path) {
        CHECK(l >= 0);
        CHECK(l < 4);
      }
    }
  }
}

namespace {

SynthScenario stationary_scenario(double xi, double sigma, std::size_t n,
                                  std::uint64_t seed) {
  SynthScenario sc;
  sc.S = 1;
  sc.T = n;
  sc.K = 1;
  sc.switches_per_location = 0;
  sc.seed = seed;
  sc.theta = RegimeParameters::zeros(1, 0);
  sc.theta.xi_coeffs(0)[0] = xi;
  sc.theta.sigma_coeffs(0)[0] = sigma;
  return sc;
}

}  // namespace

TEST_CASE("theta_step leaves empty regimes frozen") {
  const ExcessPanel panel = testutil::single_location_panel({0.5, 1.2, 0.8});
  const CovariatePanel covs = empty_covariates(panel);
  SwitchingPath paths;
  paths.labels = {{0, 0, 0}};  // regime 1 never assigned

  RegimeParameters warm = RegimeParameters::zeros(2, 0);
  warm.xi_coeffs(0)[0] = 0.1;
  warm.sigma_coeffs(0)[0] = 1.0;
  warm.xi_coeffs(1)[0] = 0.23;
  warm.sigma_coeffs(1)[0] = 4.56;

  Rng rng(3);
  const auto result = theta_step(panel, covs, paths, 0.0, true, warm,
                                 AnnealerSettings{}, rng);
  CHECK(result.xi_coeffs(1)[0] == 0.23);
  CHECK(result.sigma_coeffs(1)[0] == 4.56);
  CHECK(result.sigma_coeffs(0)[0] > 0.0);
}

TEST_CASE("theta_step never returns worse than the warm start") {
  const SynthData data = gen_panel(stationary_scenario(0.1, 2.0, 300, 9));
  SwitchingPath paths;
  paths.labels = data.truth.labels;
  RegimeParameters warm = RegimeParameters::zeros(1, 0);
  warm.xi_coeffs(0)[0] = 0.0;
  warm.sigma_coeffs(0)[0] = 1.0;  // deliberately poor scale

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const double before = penalized_nll(data.panel, data.covariates, warm, paths, 0.5);
    const auto result = theta_step(data.panel, data.covariates, paths, 0.5, true,
                                   warm, AnnealerSettings{}, rng);
    const double after = penalized_nll(data.panel, data.covariates, result, paths, 0.5);
    CHECK(after <= before + 1e-9);
  }
}

TEST_CASE("stationary fit lands near the dense grid-search oracle") {
  const SynthData data = gen_panel(stationary_scenario(0.0, 3.0, 2000, 17));
  const auto oracle = testutil::gpd_mle_grid_oracle(data.panel.excesses[0]);
  CHECK(std::abs(oracle.xi - 0.0) < 0.08);  // the oracle itself sits near truth
  CHECK(std::abs(oracle.sigma - 3.0) < 0.25);

  ModelConfig config;
  config.K = 1;
  config.C = 0;
  config.restarts = 3;
  config.seed = 5;
  const FitResult result = fit(data.panel, data.covariates, config, 2);
  CHECK(std::abs(result.theta.xi_coeffs(0)[0] - oracle.xi) < 0.03);
  CHECK(std::abs(result.theta.sigma_coeffs(0)[0] - oracle.sigma) < 0.03);
  for (const auto& labels : result.paths.labels)
    CHECK(switch_count(labels) == 0);
}

TEST_CASE("a huge L1 weight shrinks a pure-noise covariate") {
  // one location, one uniform-noise covariate with zero true effect
  SynthScenario sc;
  sc.S = 1;
  sc.T = 800;
  sc.K = 1;
  sc.switches_per_location = 0;
  sc.seed = 21;
  sc.covariates = {{"noise", CovariateKind::local, CovariateGenerator::uniform, 0.0}};
  sc.theta = RegimeParameters::zeros(1, 1);
  sc.theta.xi_coeffs(0)[0] = 0.1;
  sc.theta.sigma_coeffs(0)[0] = 2.0;
  const SynthData data = gen_panel(sc);

  SwitchingPath paths;
  paths.labels = data.truth.labels;
  RegimeParameters warm = RegimeParameters::zeros(1, 1);
  warm.sigma_coeffs(0)[0] = 2.0;

  Rng rng(7);
  const auto result = theta_step(data.panel, data.covariates, paths, 1e6, false,
                                 warm, AnnealerSettings{}, rng);
  CHECK(std::abs(result.xi_coeffs(0)[1]) < 0.01);
  CHECK(std::abs(result.sigma_coeffs(0)[1]) < 0.01);
}

TEST_CASE("fit is bit-deterministic and monotone over AO half-steps") {
  const SynthData data = gen_panel(default_recovery_scenario(3));
  ModelConfig config;
  config.K = 2;
  config.C = 10;
  config.restarts = 3;
  config.seed = 12;

  const FitResult a = fit(data.panel, data.covariates, config, 2);
  const FitResult b = fit(data.panel, data.covariates, config, 1);
  CHECK(a.theta.xi == b.theta.xi);
  CHECK(a.theta.sigma == b.theta.sigma);
  CHECK(a.paths.labels == b.paths.labels);
  CHECK(a.nll == b.nll);
  CHECK(a.penalized_nll == b.penalized_nll);
  CHECK(a.restart_index_of_best == b.restart_index_of_best);

  REQUIRE(a.objective_history.size() >= 2);
  for (std::size_t i = 1; i < a.objective_history.size(); ++i)
    CHECK(a.objective_history[i] <= a.objective_history[i - 1] + 1e-9);

  // the penalized objective is recomputable from the returned parameters
  CHECK(std::abs(penalized_nll(data.panel, data.covariates, a.theta, a.paths,
                               config.lambda) -
                 a.penalized_nll) < 1e-9);
  CHECK(feasibility_check(a.theta, data.panel, data.covariates, &a.paths).ok);
  for (const auto& labels : a.paths.labels) CHECK(switch_count(labels) <= config.C);
}

TEST_CASE("more restarts never worsen the objective") {
  const SynthData data = gen_panel(default_recovery_scenario(8));
  ModelConfig config;
  config.K = 2;
  config.C = 10;
  config.seed = 4;
  config.restarts = 1;
  const FitResult one = fit(data.panel, data.covariates, config, 2);
  config.restarts = 6;
  const FitResult six = fit(data.panel, data.covariates, config, 2);
  CHECK(six.penalized_nll <= one.penalized_nll + 1e-12);
}

TEST_CASE("locations without excesses ride along without disturbing the fit") {
  ExcessPanel panel;
  panel.locations = {"empty", "full"};
  panel.thresholds = {0.0, 0.0};
  panel.times = {{}, {1, 2, 3, 4, 5, 6}};
  panel.excesses = {{}, {0.4, 1.2, 0.7, 2.2, 0.9, 1.6}};
  const CovariatePanel covs = empty_covariates(panel);
  ModelConfig config;
  config.K = 2;
  config.C = 2;
  config.restarts = 2;
  const FitResult result = fit(panel, covs, config, 1);
  CHECK(result.paths.labels[0].empty());
  CHECK(result.paths.labels[1].size() == 6);
  CHECK(std::isfinite(result.nll));
}

TEST_CASE("fit validates inputs") {
  const ExcessPanel panel = testutil::single_location_panel({1.0, 2.0});
  const CovariatePanel covs = empty_covariates(panel);
  ModelConfig config;
  config.restarts = 1;
  SUBCASE("bad K") {
    config.K = 0;
    CHECK_THROWS_AS(fit(panel, covs, config, 1), ValidationError);
  }
  SUBCASE("negative lambda") {
    config.lambda = -1.0;
    CHECK_THROWS_AS(fit(panel, covs, config, 1), ValidationError);
  }
  SUBCASE("misaligned covariates") {
    CovariatePanel bad = covs;
    bad.values.emplace_back();
    CHECK_THROWS_AS(fit(panel, bad, config, 1), ValidationError);
  }
  SUBCASE("empty panel") {
    ExcessPanel empty;
    empty.locations = {"a"};
    empty.thresholds = {0.0};
    empty.times = {{}};
    empty.excesses = {{}};
    CHECK_THROWS_AS(fit(empty, empty_covariates(empty), config, 1), ValidationError);
  }
}
