#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qcmd/potential.hpp"

using namespace qcmd;

namespace {

WaveFunction packet(double h, double alpha, double x0) {
  const Grid g = make_grid(h);
  ComplexVector v(g.n_points());
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double d = g.node(j) - x0;
    v[j] = std::exp(-alpha * d * d);
  }
  WaveFunction psi(g, v, h);
  psi.normalize();
  return psi;
}

}  // namespace

TEST_CASE("builtin potential values") {
  const Potential v = builtin_sin_quadratic();
  CHECK(v.value(0, 0) == 0.0);
  CHECK(v.value(1, 1) == doctest::Approx(std::sin(2.0)).epsilon(1e-15));
  CHECK(v.grad_x(0, 0.7) == 0.0);
  CHECK(v.grad_x(0, -2.3) == 0.0);

  const Potential hv = harmonic_potential();
  CHECK(hv.value(1, 2) == doctest::Approx(2.5));
  CHECK(hv.grad_x(3, 0) == doctest::Approx(3.0));
  CHECK(hv.grad_y(0, -4) == doctest::Approx(-4.0));

  const Potential z = zero_potential();
  CHECK(z.value(1, 1) == 0.0);
  CHECK(z.grad_y(1, 1) == 0.0);
}

TEST_CASE("analytic gradients agree with centred differences") {
  CHECK(oracle::gradient_fd_error(builtin_sin_quadratic()) <= 1e-6);
  CHECK(oracle::gradient_fd_error(harmonic_potential()) <= 1e-6);
  CHECK(oracle::gradient_fd_error(zero_potential()) <= 1e-6);
}

TEST_CASE("registry lookup") {
  auto reg = PotentialRegistry::with_builtins();
  CHECK(reg.contains("sin_x2_y2"));
  CHECK(reg.contains("harmonic"));
  CHECK(reg.contains("zero"));
  CHECK(reg.make("harmonic").name == "harmonic");
  CHECK_THROWS_AS(reg.make("nope"), std::invalid_argument);
  reg.add("shift", [] {
    Potential p = zero_potential();
    p.name = "shift";
    return p;
  });
  CHECK(reg.names().size() == 4);
  CHECK_THROWS_AS(reg.add("", [] { return zero_potential(); }), std::invalid_argument);
}

TEST_CASE("Ehrenfest gradient") {
  const WaveFunction psi = packet(0.04, 12.5, -1.0);

  Potential y_only;
  y_only.name = "y2";
  y_only.value = [](double, double y) { return 0.5 * y * y; };
  y_only.grad_x = [](double, double) { return 0.0; };
  y_only.grad_y = [](double, double y) { return y; };
  CHECK(ehrenfest_potential_gradient(y_only, psi, 0.8) == doctest::Approx(0.8).epsilon(1e-12));

  Potential x_only;
  x_only.value = [](double x, double) { return std::sin(x); };
  x_only.grad_x = [](double x, double) { return std::cos(x); };
  x_only.grad_y = [](double, double) { return 0.0; };
  CHECK(ehrenfest_potential_gradient(x_only, psi, 0.3) == 0.0);

  // A narrow packet samples grad_y near its centre: 2y cos(x0^2 + y^2) up to
  // O(1 / alpha) from the packet width.
  const WaveFunction narrow = packet(0.01, 200.0, 0.5);
  const double y = 1.0;
  const double expected = 2.0 * y * std::cos(0.25 + y * y);
  const double got = ehrenfest_potential_gradient(builtin_sin_quadratic(), narrow, y);
  CHECK(std::abs(got - expected) <= 0.02);

  CHECK_THROWS_AS(ehrenfest_potential_gradient(y_only, psi.grid(), RealVector(3), 0.0), std::invalid_argument);
}
