#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "qcmd/experiments.hpp"
#include "qcmd/fit.hpp"

using namespace qcmd;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("qcmd_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ErrorRecord sample_record() {
  return {"h-0.04-dt-0.001", 0.04, 0.0009765625, 0.5, 1024, "observable:gaussian", 0.123456789012345678,
          1.0 / 3.0, 2.5e-17, 0.25};
}

}  // namespace

TEST_CASE("log-log fit") {
  const std::vector<double> x{1, 2, 4, 8};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * v * v);
  const SlopeFit f = fit_loglog(x, y);
  CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::exp(f.intercept) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(f.r_squared == doctest::Approx(1.0));
  CHECK(f.points == 4);

  const std::vector<double> noisy{1e-20, 8, 32, 128};
  const SlopeFit g = fit_loglog(x, noisy, 1e-12);
  CHECK(g.points == 3);
  CHECK(g.slope == doctest::Approx(2.0));

  CHECK_THROWS_AS(fit_loglog(std::vector<double>{1, 2}, std::vector<double>{1}), std::invalid_argument);
  CHECK_THROWS_AS(fit_loglog(std::vector<double>{1, 2}, std::vector<double>{1e-20, 1.0}, 1e-12), std::invalid_argument);
}

TEST_CASE("CSV header and rows") {
  CHECK(std::string(kCsvHeader) ==
        "run_id,h,dt,T,n_points,metric,reference_value,numerical_value,abs_error,wall_time_seconds");
  const ErrorRecord r = sample_record();
  const std::string row = to_csv_row(r);
  CHECK(std::count(row.begin(), row.end(), ',') == 9);
  const ErrorRecord back = parse_csv_row(row);
  CHECK(back == r);

  ErrorRecord bad = r;
  bad.metric = "a,b";
  CHECK_THROWS_AS(to_csv_row(bad), std::invalid_argument);
  CHECK_THROWS_AS(parse_csv_row("x,1,2"), std::runtime_error);
  CHECK_THROWS_AS(parse_csv_row("x,0.1,0.1,0.5,12.5,m,1,1,0,0"), std::runtime_error);
  CHECK_THROWS_AS(parse_csv_row("x,abc,0.1,0.5,16,m,1,1,0,0"), std::runtime_error);
}

TEST_CASE("CSV file round trip through the appender") {
  const fs::path dir = scratch_dir("csv");
  const fs::path path = dir / "out.csv";
  {
    CsvAppender sink(path);
    sink.append(sample_record());
    ErrorRecord second = sample_record();
    second.metric = "wavefunction_l2";
    second.abs_error = 1e-3;
    sink.append(std::vector<ErrorRecord>{second});
  }
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == kCsvHeader);
  const auto rows = read_csv(path);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == sample_record());
  CHECK(rows[1].metric == "wavefunction_l2");

  std::ofstream(dir / "bad.csv") << "h,dt\n1,2\n";
  CHECK_THROWS_AS(read_csv(dir / "bad.csv"), std::runtime_error);
  CHECK_THROWS(read_csv(dir / "missing.csv"));
  fs::remove_all(dir);
}

TEST_CASE("manifest") {
  RunConfig cfg;
  cfg.h = std::ldexp(1.0, -7);
  cfg.potential_name = "harmonic";
  cfg.observables = {"gaussian"};
  const auto j = to_json(cfg);
  const RunConfig back = run_config_from_json(j);
  CHECK(back.h == cfg.h);
  CHECK(back.dt == cfg.dt);
  CHECK(back.T == cfg.T);
  CHECK(back.potential_name == "harmonic");
  CHECK(back.alpha == cfg.alpha);
  CHECK(back.x0 == cfg.x0);
  CHECK(back.k0 == cfg.k0);
  CHECK(back.y0 == cfg.y0);
  CHECK(back.v0 == cfg.v0);
  CHECK(back.grid_points_per_h == cfg.grid_points_per_h);
  CHECK(back.observables == cfg.observables);
  CHECK(back.reference_dt == cfg.reference_dt);
  CHECK(back.max_grid_points == cfg.max_grid_points);

  const auto m = make_manifest("sweep-dt", cfg, {{"dt_list", {0.01, 0.005}}});
  CHECK(m.at("command") == "sweep-dt");
  CHECK(m.at("code_version") == code_version());
  CHECK(m.at("config") == j);
  CHECK(m.at("dt_list").size() == 2);
  const std::string ts = m.at("timestamp");
  CHECK(std::regex_match(ts, std::regex(R"(\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z)")));

  CHECK(manifest_path_for("out/sweep.csv") == fs::path("out/sweep.manifest.json"));
  const fs::path dir = scratch_dir("manifest");
  write_manifest(dir / "m.json", m);
  std::ifstream in(dir / "m.json");
  CHECK(nlohmann::json::parse(in) == m);
  fs::remove_all(dir);
}

TEST_CASE("initial state") {
  RunConfig cfg;
  const QcmdState s = initial_state(cfg);
  CHECK(std::abs(mass(s.psi) - 1.0) <= 1e-12);
  CHECK(std::abs(expectation(builtin_observable("position"), s.psi) - cfg.x0) <= 1e-9);
  CHECK(std::abs(expectation(builtin_observable("momentum"), s.psi) - cfg.h * cfg.k0) <= 1e-8);
  CHECK(s.nuclear.y == cfg.y0);
  CHECK(s.nuclear.v == cfg.v0);
  CHECK(s.psi.size() == 1024);

  RunConfig wide = cfg;
  wide.alpha = 0.1;
  CHECK_THROWS_AS(initial_state(wide), std::domain_error);
  RunConfig bad = cfg;
  bad.h = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.dt = 0.3;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("measure_run against itself is exact") {
  RunConfig cfg;
  cfg.T = 0.01;
  cfg.reference_dt = 1e-3;
  cfg.dt = 1e-3;
  const QcmdState ref = run_to_final(cfg, cfg.reference_dt);
  const auto rows = measure_run(cfg, ref, SweepMode::all, "self");
  CHECK(rows.size() == 3 + cfg.observables.size());
  for (const auto& r : rows) {
    CHECK(r.abs_error == 0.0);
    CHECK(r.run_id == "self");
    CHECK(r.n_points == 1024);
  }
  CHECK(measure_run(cfg, ref, SweepMode::wavefunction, "w").size() == 3);
  CHECK(measure_run(cfg, ref, SweepMode::observables, "o").size() == cfg.observables.size());
}

TEST_CASE("sweeps") {
  RunConfig cfg;
  cfg.T = 0.0625;
  cfg.reference_dt = std::ldexp(1.0, -13);
  ReferenceCache cache;
  SweepOptions opt;
  opt.cache = &cache;
  opt.workers = 2;

  const std::vector<double> dts{std::ldexp(1.0, -6), std::ldexp(1.0, -7), std::ldexp(1.0, -8)};
  const SweepResult a = sweep_dt(cfg, dts, opt);
  CHECK(cache.size() == 1);
  CHECK(a.records.size() == dts.size() * (3 + cfg.observables.size()));
  REQUIRE(a.fits.count("wavefunction_l2") == 1);
  CHECK(a.fits.at("wavefunction_l2").slope == doctest::Approx(2.0).epsilon(0.1));

  SUBCASE("deterministic across worker counts") {
    SweepOptions serial;
    serial.workers = 1;
    const SweepResult b = sweep_dt(cfg, dts, serial);
    auto key = [](const ErrorRecord& r) { return r.run_id + r.metric; };
    std::map<std::string, double> lhs, rhs;
    for (const auto& r : a.records) lhs[key(r)] = r.abs_error;
    for (const auto& r : b.records) rhs[key(r)] = r.abs_error;
    CHECK(lhs == rhs);
  }
  SUBCASE("reference step gives zero error") {
    const SweepResult c = sweep_dt(cfg, {cfg.reference_dt}, opt);
    for (const auto& r : c.records) CHECK(r.abs_error == 0.0);
  }
  SUBCASE("non-commensurate dt is named") {
    try {
      sweep_dt(cfg, {0.01, 0.03}, opt);
      FAIL("expected a throw");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find("dt=0.01") != std::string::npos);
    }
  }
  SUBCASE("sweep_h writes through the sink") {
    const fs::path dir = scratch_dir("sweep");
    {
      CsvAppender sink(dir / "h.csv");
      SweepOptions with_sink = opt;
      with_sink.sink = &sink;
      RunConfig coarse = cfg;
      coarse.dt = std::ldexp(1.0, -8);
      const SweepResult h = sweep_h(coarse, {0.04, 0.02}, SweepMode::wavefunction, with_sink);
      CHECK(h.records.size() == 6);
    }
    CHECK(read_csv(dir / "h.csv").size() == 6);
    fs::remove_all(dir);
  }
}

TEST_CASE("error envelope") {
  auto rec = [](double h, double dt, const std::string& metric, double err) {
    ErrorRecord r;
    r.h = h;
    r.dt = dt;
    r.metric = metric;
    r.abs_error = err;
    return r;
  };
  std::vector<ErrorRecord> records{
      rec(0.1, 0.01, "wavefunction_l2", 1e-3), rec(0.1, 0.01, "observable:gaussian", 5e-3),
      rec(0.05, 0.01, "wavefunction_l2", 4e-3), rec(0.05, 0.01, "observable:gaussian", 2e-4),
      rec(0.1, 0.005, "wavefunction_l2", 2.5e-4), rec(0.1, 0.005, "observable:gaussian", 1e-3),
      rec(0.05, 0.005, "wavefunction_l2", 1e-3), rec(0.05, 0.005, "observable:gaussian", 5e-5),
      rec(0.1, 0.01, "observable:position", 1.0)};
  const EnvelopeTable t = min_error_envelope(records, {{"gaussian", 1.0}});
  CHECK(t.rows.size() == 4);
  for (const auto& row : t.rows) {
    CHECK(row.envelope <= row.observable_error);
    CHECK(row.envelope <= row.wavefunction_proxy);
  }
  REQUIRE(t.worst_cases.size() == 1);
  const auto& wc = t.worst_cases[0];
  CHECK(wc.dt_values == std::vector<double>{0.005, 0.01});
  CHECK(wc.worst[1] == doctest::Approx(2e-3));  // min(5e-3, 2 * 1e-3) at h = 0.1
  CHECK(wc.worst_h[1] == 0.1);
  CHECK(wc.worst[0] == doctest::Approx(5e-4));
  CHECK(wc.fitted);
  CHECK(wc.fit.slope == doctest::Approx(2.0));

  // a single h: the envelope is that h's error when it is the smaller path
  const EnvelopeTable single = min_error_envelope(
      {rec(0.1, 0.01, "wavefunction_l2", 1.0), rec(0.1, 0.01, "observable:gaussian", 3e-4)}, {{"gaussian", 1.0}});
  REQUIRE(single.rows.size() == 1);
  CHECK(single.rows[0].envelope == 3e-4);

  CHECK(symbol_sup_norm(builtin_observable("gaussian"), make_grid(0.04)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(symbol_sup_norm(builtin_observable("kinetic"), make_grid(0.04)), std::invalid_argument);
}
