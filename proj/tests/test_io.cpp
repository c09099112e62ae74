#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "fembv/exceptions.hpp"
#include "fembv/io.hpp"
#include "fembv/synth.hpp"
#include "test_util.hpp"

using namespace fembv;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("fembv_io_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace

TEST_CASE("format_double is shortest-round-trip exact") {
  for (const double v : {0.1, 1.0 / 3.0, 98.02001, 1e-300, -4.99999, 0.0}) {
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
  CHECK(format_double(kInf) == "inf");
  CHECK(format_double(-kInf) == "-inf");
}

TEST_CASE("excess panel CSV round-trips") {
  TempDir dir;
  const SynthData data = gen_panel(default_recovery_scenario(6));
  const fs::path p = dir.path / "excess.csv";
  write_excess_csv(p, data.panel);
  const ExcessPanel back = read_excess_csv(p);
  CHECK(back.locations == data.panel.locations);
  CHECK(back.times == data.panel.times);
  CHECK(back.excesses == data.panel.excesses);
}

TEST_CASE("covariates and paths CSV round-trip") {
  TempDir dir;
  const SynthData data = gen_panel(noise_covariate_scenario(3));
  write_covariates_csv(dir.path / "covs.csv", data.panel, data.covariates);
  const RawCovariates raw = read_covariates_csv(dir.path / "covs.csv");
  CHECK(raw.names == data.covariates.names);
  CHECK(raw.times[0] == data.covariates.times[0]);
  CHECK(raw.values[2] == data.covariates.values[2]);

  write_paths_csv(dir.path / "paths.csv", data.panel, data.truth);
  const PathsTable table = read_paths_csv(dir.path / "paths.csv");
  CHECK(table.locations == data.panel.locations);
  CHECK(table.paths.labels == data.truth.labels);
}

TEST_CASE("raw series CSV parses and validates") {
  TempDir dir;
  const fs::path p = dir.path / "raw.csv";
  SUBCASE("good file") {
    write_file(p, "location,time,value\na,1,0.5\na,2,1.5\nb,1,2.0\n");
    const auto series = read_raw_series_csv(p);
    REQUIRE(series.size() == 2);
    CHECK(series[0].location_id == "a");
    CHECK(series[0].values == std::vector<double>{0.5, 1.5});
  }
  SUBCASE("malformed row names its line number") {
    write_file(p, "location,time,value\na,1,0.5\na,2\n");
    CHECK_THROWS_WITH_AS(read_raw_series_csv(p), doctest::Contains(":3:"),
                         ValidationError);
  }
  SUBCASE("bad numeric field names its line number") {
    write_file(p, "location,time,value\na,1,zzz\n");
    CHECK_THROWS_WITH_AS(read_raw_series_csv(p), doctest::Contains(":2:"),
                         ValidationError);
  }
  SUBCASE("wrong header") {
    write_file(p, "loc,when,what\na,1,2\n");
    CHECK_THROWS_AS(read_raw_series_csv(p), ValidationError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_raw_series_csv(dir.path / "nope.csv"), ValidationError);
  }
  SUBCASE("non-monotone times") {
    write_file(p, "location,time,value\na,2,0.5\na,1,1.5\n");
    CHECK_THROWS_AS(read_raw_series_csv(p), ValidationError);
  }
}

TEST_CASE("fit JSON round-trips the parameters exactly") {
  TempDir dir;
  FitResult result;
  result.theta = RegimeParameters::zeros(2, 2);
  result.theta.xi_coeffs(0)[0] = 0.12345678901234567;
  result.theta.xi_coeffs(0)[1] = -0.1;
  result.theta.xi_coeffs(0)[2] = 1.0 / 3.0;
  result.theta.sigma_coeffs(0)[0] = 5.2598;
  result.theta.sigma_coeffs(1)[0] = 30.8296;
  result.nll = 11887.528;
  result.penalized_nll = 11887.528;
  result.config.K = 2;
  result.config.C = 20;
  result.config.seed = 42;
  result.converged = true;

  const std::vector<std::string> names = {"temp", "humidity"};
  const std::vector<CovariateKind> kinds = {CovariateKind::local,
                                            CovariateKind::global};
  write_fit_json(dir.path / "fit.json", result, names, kinds);
  const LoadedFit loaded = read_fit_json(dir.path / "fit.json");
  CHECK(loaded.theta.xi == result.theta.xi);
  CHECK(loaded.theta.sigma == result.theta.sigma);
  CHECK(loaded.covariate_names == names);
  CHECK(loaded.covariate_kinds == kinds);
  CHECK(loaded.config.K == 2);
  CHECK(loaded.config.C == 20);
  CHECK(loaded.config.seed == 42);
  CHECK(loaded.nll == result.nll);
}

TEST_CASE("manifest lands atomically next to outputs") {
  TempDir dir;
  RunManifest manifest;
  manifest.command = "fit";
  manifest.inputs.emplace_back("excesses", "excess.csv");
  manifest.params.emplace_back("K", "2");
  manifest.outputs = {"fit.json"};
  manifest.wall_time_seconds = 1.5;
  write_manifest(dir.path / "manifest.json", manifest);
  CHECK(fs::exists(dir.path / "manifest.json"));
  CHECK_FALSE(fs::exists(dir.path / "manifest.json.tmp"));
}
