#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "adiabatica/harness.hpp"
#include "adiabatica/svg.hpp"

using namespace adiabatica;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentReport synthetic(RateKind kind, double exponent, const std::vector<double>& eps,
                           const std::vector<double>& dev) {
  ExperimentReport r;
  r.example = "gap_uniform";
  r.expected = {kind, exponent};
  for (size_t i = 0; i < eps.size(); ++i) {
    SweepRecord s;
    s.eps = eps[i];
    s.sup_dev = dev[i];
    r.records.push_back(s);
  }
  assess(r);
  return r;
}

// The report rendered into tests/data/golden_report.svg.
ExperimentReport golden_report() {
  return synthetic(RateKind::order_eps, 1.0, {1e-1, 3e-2, 1e-2, 3e-3, 1e-3}, {0.21, 0.058, 0.0205, 0.0063, 0.0019});
}

fs::path scratch_dir(const char* name) {
  const fs::path d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("geometric grid") {
  const auto g = geometric_grid(1e-1, 1e-3, 5);
  REQUIRE(g.size() == 5);
  CHECK(g.front() == doctest::Approx(1e-1));
  CHECK(g[2] == doctest::Approx(1e-2));
  CHECK(g.back() == doctest::Approx(1e-3));
}

TEST_CASE("slope fit against a scipy linregress oracle") {
  // scipy.stats.linregress on the logs; half width = stderr * t.ppf(0.975, 3)
  const SlopeFit f = fit_slope({1e-1, 3e-2, 1e-2, 3e-3, 1e-3}, {0.21, 0.058, 0.0205, 0.0063, 0.0019});
  CHECK(f.slope == doctest::Approx(1.0102009753097891).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(0.747754982901558).epsilon(1e-12));
  CHECK(f.half_width == doctest::Approx(0.04369049100691751).epsilon(1e-9));
  CHECK(f.points == 5);
  CHECK_THROWS_AS(fit_slope({1, 2, 3}, {1, 2, 3}), ParameterError);
  CHECK_THROWS_AS(fit_slope({1, 2, 3, 4}, {1, 0, 3, 4}), ParameterError);
}

TEST_CASE("slope fit recovers exact power laws") {
  for (double p : {0.25, 1.0, 2.0}) {
    std::vector<double> e = geometric_grid(1e-1, 1e-4, 7), v;
    for (double x : e) v.push_back(3.0 * std::pow(x, p));
    const SlopeFit f = fit_slope(e, v);
    CHECK(f.slope == doctest::Approx(p).epsilon(1e-12));
    CHECK(f.half_width < 1e-10);
  }
}

TEST_CASE("verdict rules") {
  const std::vector<double> e = {1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
  CHECK(golden_report().verdict_pass);
  CHECK_FALSE(synthetic(RateKind::order_eps, 1.0, e, {1, 0.5, 0.25, 0.12, 0.06}).verdict_pass);  // slope ~0.6
  CHECK(synthetic(RateKind::power, 0.25, e, {1, 0.75, 0.56, 0.42, 0.31}).verdict_pass);
  CHECK_FALSE(synthetic(RateKind::power, 1.0, e, {1, 0.75, 0.56, 0.42, 0.31}).verdict_pass);
  // o(1): halving with at most one inversion
  CHECK(synthetic(RateKind::little_o, 0, e, {0.5, 0.4, 0.45, 0.3, 0.2}).verdict_pass);
  CHECK_FALSE(synthetic(RateKind::little_o, 0, e, {0.5, 0.6, 0.4, 0.45, 0.2}).verdict_pass);
  CHECK_FALSE(synthetic(RateKind::little_o, 0, e, {0.5, 0.45, 0.4, 0.35, 0.3}).verdict_pass);
  CHECK(synthetic(RateKind::non_adiabatic, 0, e, {1, 1, 1, 1, 0.95}).verdict_pass);
  CHECK(synthetic(RateKind::non_adiabatic, 0, e, {1, 1, 1, 1, 0.95}).verdict == "non-adiabatic");
  CHECK_FALSE(synthetic(RateKind::non_adiabatic, 0, e, {1, 0.5, 0.2, 0.1, 0.05}).verdict_pass);
  CHECK(synthetic(RateKind::trivial, 0, e, {0, 1e-9, 0, 0, 0}).verdict_pass);
  CHECK_FALSE(synthetic(RateKind::trivial, 0, e, {0, 1e-6, 0, 0, 0}).verdict_pass);
}

TEST_CASE("exit codes") {
  ExperimentReport r = golden_report();
  CHECK(r.exit_code() == 0);
  r.verdict_pass = false;
  CHECK(r.exit_code() == 1);
  r.invariant_pass = false;
  CHECK(r.exit_code() == 2);
}

TEST_CASE("config parsing") {
  const ExperimentConfig c = parse_config(R"(
example = "gap_uniform"
jobs = 2
[params]
d = 4
[sweep]
eps_max = 0.1
eps_min = 0.001
points = 3
metric = "projected"
[integrator]
tol = 1e-9
method = "rk4"
[nogap]
n = 5
schedule = "qualitative"
[output]
dir = "somewhere"
svg = false
)");
  CHECK(c.example == "gap_uniform");
  CHECK(c.params.at("d") == 4.0);
  REQUIRE(c.eps.size() == 3);
  CHECK(c.eps[1] == doctest::Approx(1e-2));
  CHECK(c.metric == Metric::projected);
  CHECK(c.tol_step == 1e-9);
  CHECK(c.integrator == Integrator::rk4);
  CHECK(c.nogap_n == 5);
  CHECK(c.schedule == Schedule::qualitative);
  CHECK(c.out_dir == "somewhere");
  CHECK_FALSE(c.write_svg);
  CHECK(c.jobs == 2);

  const ExperimentConfig e = parse_config("example = \"gap_static\"\n[sweep]\neps = [0.1, 0.05]\n");
  CHECK(e.eps == std::vector<double>{0.1, 0.05});

  CHECK_THROWS_AS(parse_config("[sweep]\npoints = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("example = \"x\"\n[sweep]\neps = [0.1, 0.2]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("example = \"x\"\n[integrator]\nmethod = \"euler\"\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("example = \"x\"\n[sweep]\nmetric = \"l2\"\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("example = "), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.toml"), IoError);
}

TEST_CASE("shipped configs parse") {
  for (const auto& f : fs::directory_iterator(ADIABATICA_CONFIG_DIR)) {
    if (f.path().extension() != ".toml") continue;
    CAPTURE(f.path().string());
    const ExperimentConfig c = load_config(f.path().string());
    CHECK_NOTHROW(registry_entry(c.example));
  }
}

TEST_CASE("run: CSV schema, files, determinism across job counts") {
  const fs::path dir = scratch_dir("adiabatica_harness_run");
  ExperimentConfig c = parse_config("example = \"gap_crossing\"\n[sweep]\neps = [0.1, 0.05, 0.02, 0.01]\n");
  c.out_dir = dir.string();
  c.write_profiles = true;
  c.jobs = 1;
  const ExperimentReport a = run(c);
  const std::string csv_a = slurp(dir / "gap_crossing.csv");
  CHECK(csv_a == a.csv());
  CHECK(csv_a.rfind("example,epsilon,sup_dev,adiab_resid,comm_resid,runtime_ms\n", 0) == 0);
  CHECK(fs::exists(dir / "gap_crossing.svg"));
  CHECK(fs::exists(dir / "gap_crossing_profile_0.csv"));
  for (const auto& r : a.records) {
    CHECK(r.adiab_resid < kAdiabResidLimit);
    CHECK(r.comm_resid < kCommResidLimit);
    CHECK(r.runtime_ms == 0.0);
  }
  c.jobs = 3;
  const ExperimentReport b = run(c);
  CHECK(slurp(dir / "gap_crossing.csv") == csv_a);
  CHECK(b.verdict == a.verdict);

  const ExperimentReport back = read_report_csv((dir / "gap_crossing.csv").string());
  CHECK(back.example == "gap_crossing");
  CHECK(back.records.size() == 4);
  CHECK(back.expected.kind == RateKind::little_o);
  CHECK(back.csv() == csv_a);
  fs::remove_all(dir);
}

TEST_CASE("floor filtering on truncated gapless examples") {
  ExperimentConfig c = parse_config(
      "example = \"nogap_shift\"\n[params]\nD = 8\n[sweep]\neps = [0.5, 0.3, 0.2, 0.1, 0.05]\n[output]\nsvg = false\n");
  const ExperimentReport r = run(c);
  for (const auto& rec : r.records) CHECK(rec.eps >= 1.0 / 8);
  CHECK(r.records.size() == 3);
  CHECK_FALSE(r.notes.empty());
}

TEST_CASE("report CSV reader errors") {
  const fs::path dir = scratch_dir("adiabatica_harness_csv");
  write_text((dir / "bad.csv").string(), "eps,value\n1,2\n");
  CHECK_THROWS_AS(read_report_csv((dir / "bad.csv").string()), IoError);
  write_text((dir / "short.csv").string(), "example,epsilon,sup_dev,adiab_resid,comm_resid,runtime_ms\ngap_uniform,1\n");
  CHECK_THROWS_AS(read_report_csv((dir / "short.csv").string()), IoError);
  CHECK_THROWS_AS(read_report_csv((dir / "missing.csv").string()), IoError);
  fs::remove_all(dir);
}

TEST_CASE("verify subcommand checks") {
  CHECK(verify("gap_uniform", {}, 0.05).pass());
  CHECK_THROWS_AS(verify("no_such_example", {}, 0.05), RegistryError);
}

TEST_CASE("SVG matches the golden file") {
  const std::string svg = render_svg(golden_report());
  const fs::path golden = fs::path(ADIABATICA_TEST_DATA) / "golden_report.svg";
  if (std::getenv("ADIABATICA_UPDATE_GOLDEN")) {
    write_text(golden.string(), svg);
  }
  REQUIRE(fs::exists(golden));
  CHECK(svg == slurp(golden));
  CHECK(svg.find("<path id=\"fit\"") != std::string::npos);
  CHECK(svg.find("<path id=\"expected\"") != std::string::npos);
}

}  // TEST_SUITE
