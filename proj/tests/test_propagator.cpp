#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "qcmd/fit.hpp"
#include "qcmd/propagator.hpp"
#include "qcmd/run_config.hpp"

using namespace qcmd;
constexpr double kPi = std::numbers::pi;

namespace {

double l2_distance(const WaveFunction& a, const WaveFunction& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += std::norm(a[j] - b[j]);
  return std::sqrt(a.grid().spacing() * s);
}

double max_distance(const WaveFunction& a, const WaveFunction& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

QcmdState plane_wave_state(int k, double h, std::size_t n) {
  const Grid g(-kPi, kPi, n);
  ComplexVector v(n);
  for (std::size_t j = 0; j < n; ++j) v[j] = std::polar(1.0 / std::sqrt(2 * kPi), k * g.node(j));
  return {WaveFunction(g, v, h), {0.5, -0.25}, 0.0};
}

QcmdState random_state(std::size_t n, double h) {
  WaveFunction psi(Grid(-kPi, kPi, n), oracle::random_values(n), h);
  psi.normalize();
  return {psi, {0.3, 0.7}, 0.0};
}

Potential y_squared() {
  Potential p;
  p.name = "y2";
  p.value = [](double, double y) { return 0.5 * y * y; };
  p.grad_x = [](double, double) { return 0.0; };
  p.grad_y = [](double, double y) { return y; };
  return p;
}

}  // namespace

TEST_CASE("kinetic_step on a plane wave is a pure phase") {
  const double h = 0.1, dt = 0.37;
  const int k = 5;
  const QcmdState s = plane_wave_state(k, h, 64);
  const QcmdState out = kinetic_step(s, dt);
  const Complex phase = std::polar(1.0, -h * dt * k * k / 2.0);
  double err = 0.0;
  for (std::size_t j = 0; j < 64; ++j) err = std::max(err, std::abs(out.psi[j] - phase * s.psi[j]));
  CHECK(err <= 1e-13);
  CHECK(out.nuclear.y == doctest::Approx(0.5 - 0.25 * dt));
  CHECK(out.nuclear.v == -0.25);
}

TEST_CASE("kinetic_step with dt = 0 is the identity") {
  const QcmdState s = random_state(64, 0.1);
  const QcmdState out = kinetic_step(s, 0.0);
  CHECK(max_distance(out.psi, s.psi) == 0.0);
  CHECK(out.nuclear.y == s.nuclear.y);
}

TEST_CASE("kinetic_step agrees with a dense matrix exponential on n = 64") {
  const double h = 0.1, dt = 0.05;
  const QcmdState s = random_state(64, h);
  const Eigen::MatrixXcd u = oracle::dense_kinetic_propagator(s.psi.grid(), h, dt);
  Eigen::VectorXcd v(64);
  for (int j = 0; j < 64; ++j) v(j) = s.psi[static_cast<std::size_t>(j)];
  const Eigen::VectorXcd expected = u * v;
  const QcmdState out = kinetic_step(s, dt);
  double err = 0.0;
  for (int j = 0; j < 64; ++j) err = std::max(err, std::abs(expected(j) - out.psi[static_cast<std::size_t>(j)]));
  CHECK(err <= 1e-10);
}

TEST_CASE("potential_step") {
  const QcmdState s = random_state(64, 0.1);
  SUBCASE("zero potential is the identity on psi and v") {
    const QcmdState out = potential_step(s, 0.3, zero_potential());
    CHECK(max_distance(out.psi, s.psi) == 0.0);
    CHECK(out.nuclear.v == s.nuclear.v);
  }
  SUBCASE("moduli are unchanged") {
    const QcmdState out = potential_step(s, 0.7, builtin_sin_quadratic());
    double err = 0.0;
    for (std::size_t j = 0; j < 64; ++j) err = std::max(err, std::abs(std::abs(out.psi[j]) - std::abs(s.psi[j])));
    CHECK(err <= 1e-15);
  }
  SUBCASE("x-independent potential gives a uniform phase and v -= dt y") {
    const double dt = 0.2;
    const QcmdState out = potential_step(s, dt, y_squared());
    const double y = s.nuclear.y;
    CHECK(out.nuclear.v == doctest::Approx(s.nuclear.v - dt * y).epsilon(1e-13));
    const Complex phase = std::polar(1.0, -dt * y * y / (2 * 0.1));
    double err = 0.0;
    for (std::size_t j = 0; j < 64; ++j) err = std::max(err, std::abs(out.psi[j] - phase * s.psi[j]));
    CHECK(err <= 1e-14);
  }
}

TEST_CASE("strang_step and lie_step reduce to kinetic_step without a potential") {
  const QcmdState s = random_state(64, 0.1);
  const QcmdState k = kinetic_step(s, 0.1);
  CHECK(max_distance(strang_step(s, 0.1, zero_potential()).psi, k.psi) <= 1e-15);
  CHECK(max_distance(lie_step(s, 0.1, zero_potential()).psi, k.psi) <= 1e-15);
  CHECK(std::abs(mass(strang_step(s, 0.1, builtin_sin_quadratic()).psi) - 1.0) <= 1e-12);
  CHECK(std::abs(mass(lie_step(s, 0.1, builtin_sin_quadratic()).psi) - 1.0) <= 1e-12);
}

TEST_CASE("Strang local defect drops about 8x when dt halves") {
  RunConfig cfg;
  const QcmdState s = initial_state(cfg);
  const Potential v = builtin_sin_quadratic();
  auto defect = [&](double dt) {
    const QcmdState one = strang_step(s, dt, v);
    const QcmdState two = strang_step(strang_step(s, dt / 2, v), dt / 2, v);
    return l2_distance(one.psi, two.psi);
  };
  const double d1 = defect(4e-3);
  const double d2 = defect(2e-3);
  const double d3 = defect(1e-3);
  CHECK(d1 / d2 == doctest::Approx(8.0).epsilon(0.15));
  CHECK(d2 / d3 == doctest::Approx(8.0).epsilon(0.15));
}

TEST_CASE("Lie splitting converges at first order") {
  RunConfig cfg;
  cfg.T = 0.125;
  const QcmdState s = initial_state(cfg);
  const Potential v = builtin_sin_quadratic();
  const QcmdState ref = evolve_with_dt(s, 1e-5, cfg.T, v).back();
  std::vector<double> dts, errs;
  for (int p = 7; p <= 10; ++p) {
    const double dt = std::ldexp(1.0, -p);
    dts.push_back(dt);
    const QcmdState out = evolve_with_dt(s, dt, cfg.T, v, TrajectoryStorage::checkpoints, SplittingScheme::lie).back();
    errs.push_back(l2_distance(out.psi, ref.psi));
  }
  const SlopeFit fit = fit_loglog(dts, errs);
  CHECK(fit.slope == doctest::Approx(1.0).epsilon(0.15));
  for (std::size_t i = 1; i < errs.size(); ++i) CHECK(errs[i - 1] / errs[i] == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("mass drift over 10^4 Strang steps stays below 1e-10") {
  RunConfig cfg;
  QcmdState s = initial_state(cfg);
  const SplitStepPropagator prop(s.psi.grid(), cfg.h, 1e-3, builtin_sin_quadratic());
  prop.advance(s, 10000);
  CHECK(std::abs(mass(s.psi) - 1.0) <= 1e-10);
  CHECK(s.time == doctest::Approx(10.0));
}

TEST_CASE("forward then backward Strang returns to the start") {
  RunConfig cfg;
  const QcmdState s = initial_state(cfg);
  QcmdState t = s;
  const SplitStepPropagator fwd(s.psi.grid(), cfg.h, 1e-3, builtin_sin_quadratic());
  const SplitStepPropagator bwd(s.psi.grid(), cfg.h, -1e-3, builtin_sin_quadratic());
  fwd.advance(t, 500);
  CHECK(l2_distance(t.psi, s.psi) > 0.1);
  bwd.advance(t, 500);
  CHECK(l2_distance(t.psi, s.psi) <= 1e-10);
  CHECK(std::abs(t.nuclear.y - s.nuclear.y) <= 1e-10);
  CHECK(std::abs(t.nuclear.v - s.nuclear.v) <= 1e-10);
}

TEST_CASE("advance matches repeated single steps") {
  RunConfig cfg;
  const QcmdState s = initial_state(cfg);
  const Potential v = builtin_sin_quadratic();
  const SplitStepPropagator prop(s.psi.grid(), cfg.h, 1e-3, v);
  QcmdState a = s, b = s;
  prop.advance(a, 50);
  for (int i = 0; i < 50; ++i) b = strang_step(b, 1e-3, v);
  CHECK(l2_distance(a.psi, b.psi) <= 1e-12);
  CHECK(a.nuclear.y == doctest::Approx(b.nuclear.y).epsilon(1e-12));
  CHECK(a.nuclear.v == doctest::Approx(b.nuclear.v).epsilon(1e-12));
}

TEST_CASE("evolve storage modes and the free exact solution") {
  const double h = 0.1, T = 0.5;
  const int k = 3;
  const QcmdState s = plane_wave_state(k, h, 64);

  const auto zero = evolve(s, T, 0, zero_potential());
  REQUIRE(zero.size() == 1);
  CHECK(max_distance(zero[0].psi, s.psi) == 0.0);

  const auto full = evolve(s, T, 10, zero_potential(), TrajectoryStorage::full);
  CHECK(full.size() == 11);
  CHECK(full.back().time == doctest::Approx(T));

  const auto ends = evolve(s, T, 10, zero_potential());
  REQUIRE(ends.size() == 2);
  const Complex phase = std::polar(1.0, -h * T * k * k / 2.0);
  double err = 0.0;
  for (std::size_t j = 0; j < 64; ++j) err = std::max(err, std::abs(ends[1].psi[j] - phase * s.psi[j]));
  CHECK(err <= 1e-13);
  CHECK(ends[1].nuclear.y == doctest::Approx(0.5 - 0.25 * T).epsilon(1e-14));
  CHECK(max_distance(ends[1].psi, full.back().psi) <= 1e-14);
}

TEST_CASE("commensurability") {
  CHECK(commensurate_steps(0.5, std::ldexp(1.0, -11)) == 1024);
  CHECK(commensurate_steps(0.5, 1e-5) == 50000);
  CHECK(commensurate_steps(0.0, 1e-3) == 0);
  CHECK_THROWS_AS(commensurate_steps(0.5, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(commensurate_steps(0.5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(SplitStepPropagator(make_grid(0.1), 0.1, 0.0, zero_potential()), std::invalid_argument);
}

TEST_CASE("default setup: dt = 2^-11 position error is within the second-order envelope") {
  RunConfig cfg;
  const QcmdState s = initial_state(cfg);
  const Potential v = builtin_sin_quadratic();
  const QcmdState ref = evolve_with_dt(s, 1e-5, cfg.T, v).back();
  auto mean_x = [](const WaveFunction& psi) {
    double m = 0.0;
    for (std::size_t j = 0; j < psi.size(); ++j) m += psi.grid().node(j) * std::norm(psi[j]);
    return m * psi.grid().spacing();
  };
  const double e11 = std::abs(mean_x(evolve_with_dt(s, std::ldexp(1.0, -11), cfg.T, v).back().psi) - mean_x(ref.psi));
  const double e10 = std::abs(mean_x(evolve_with_dt(s, std::ldexp(1.0, -10), cfg.T, v).back().psi) - mean_x(ref.psi));
  CHECK(e11 < e10);
  CHECK(e10 / e11 == doctest::Approx(4.0).epsilon(0.1));
}
