#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "oracles.hpp"
#include "qcmd/fft.hpp"
#include "qcmd/grid.hpp"

using namespace qcmd;
constexpr double kPi = std::numbers::pi;

TEST_CASE("make_grid picks the smallest power of two covering 32 points per h") {
  CHECK(make_grid(0.04).n_points() == 1024);
  CHECK(make_grid(1.0).n_points() == 32);
  CHECK(make_grid(std::ldexp(1.0, -10)).n_points() == 32768);

  const Grid g = make_grid(0.04);
  CHECK(g.x_min() == -kPi);
  CHECK(g.x_max() == kPi);
  CHECK(std::abs(g.spacing() * static_cast<double>(g.n_points()) - g.length()) <= 4e-16 * g.length());
  CHECK(g.node(0) == -kPi);
  CHECK(g.node(1) == doctest::Approx(-kPi + g.spacing()).epsilon(1e-15));
}

TEST_CASE("make_grid rejects bad input") {
  CHECK_THROWS_AS(make_grid(0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(0.04, 0), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(std::ldexp(1.0, -20), 32, 1 << 20), std::length_error);
  CHECK_THROWS_AS(Grid(0.0, 1.0, 12), std::invalid_argument);
  CHECK_THROWS_AS(Grid(0.0, 1.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(Grid(1.0, 0.0, 8), std::invalid_argument);
}

TEST_CASE("next_power_of_two") {
  CHECK(next_power_of_two(1.0) == 1);
  CHECK(next_power_of_two(800.0) == 1024);
  CHECK(next_power_of_two(1024.0) == 1024);
  CHECK(next_power_of_two(1024.5) == 2048);
}

TEST_CASE("mass of simple states") {
  const Grid g(-kPi, kPi, 64);
  WaveFunction uniform(g, ComplexVector(64, Complex(1.0 / std::sqrt(2.0 * kPi), 0.0)), 0.1);
  CHECK(mass(uniform) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(uniform.is_normalized());

  WaveFunction zero(g, ComplexVector(64), 0.1);
  CHECK(mass(zero) == 0.0);
  CHECK_THROWS(zero.normalize());

  WaveFunction random(g, oracle::random_values(64), 0.1);
  random.normalize();
  CHECK(std::abs(mass(random) - 1.0) <= 1e-12);

  CHECK_THROWS_AS(WaveFunction(g, ComplexVector(63), 0.1), std::invalid_argument);
}

TEST_CASE("normalized Gaussian packet has unit mass") {
  const double h = 0.04;
  const Grid g = make_grid(h);
  ComplexVector v(g.n_points());
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double x = g.node(j);
    v[j] = std::exp(-12.5 * (x + 1) * (x + 1)) * std::polar(1.0, 50.0 * (x + 1));
  }
  WaveFunction psi(g, v, h);
  psi.normalize();
  CHECK(std::abs(mass(psi) - 1.0) <= 1e-12);
}

TEST_CASE("fourier_modes uses FFT ordering") {
  const auto k8 = fourier_modes(Grid(-kPi, kPi, 8));
  const double expect8[] = {0, 1, 2, 3, -4, -3, -2, -1};
  for (std::size_t m = 0; m < 8; ++m) CHECK(k8[m] == doctest::Approx(expect8[m]).epsilon(1e-15));

  // same layout on a shifted domain of the same length
  const auto shifted = fourier_modes(Grid(0.0, 2 * kPi, 8));
  for (std::size_t m = 0; m < 8; ++m) CHECK(shifted[m] == doctest::Approx(expect8[m]).epsilon(1e-15));
  const auto k16 = fourier_modes(Grid(0.0, 4 * kPi, 16));
  CHECK(k16[8] == doctest::Approx(-4.0).epsilon(1e-15));

  CHECK(fourier_modes(Grid(-kPi, kPi, 1024))[512] == doctest::Approx(-512.0).epsilon(1e-15));
}

TEST_CASE("periodic trapezoid quadrature") {
  const Grid g(-kPi, kPi, 64);
  RealVector ones(64, 1.0), s(64), c2(16);
  for (std::size_t j = 0; j < 64; ++j) s[j] = std::sin(g.node(j));
  CHECK(quadrature(ones, g) == doctest::Approx(2 * kPi).epsilon(1e-14));
  CHECK(std::abs(quadrature(s, g)) <= 1e-14);

  const Grid g16(-kPi, kPi, 16);
  for (std::size_t j = 0; j < 16; ++j) c2[j] = std::cos(g16.node(j)) * std::cos(g16.node(j));
  CHECK(std::abs(quadrature(c2, g16) - kPi) <= 1e-13);
}

TEST_CASE("FFT matches the direct DFT and round-trips") {
  const std::size_t n = 32;
  const auto f = oracle::random_values(n);
  FourierTransform fft(n);
  ComplexVector F = f;
  fft.forward(F);
  double err = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    Complex sum = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      sum += f[j] * std::polar(1.0, -2.0 * kPi * static_cast<double>(j * m) / static_cast<double>(n));
    err = std::max(err, std::abs(sum - F[m]));
  }
  CHECK(err <= 1e-12);

  fft.inverse(F);
  double back = 0.0;
  for (std::size_t j = 0; j < n; ++j) back = std::max(back, std::abs(F[j] - f[j]));
  CHECK(back <= 1e-14);
  CHECK_THROWS(fft.forward(std::span<Complex>(F.data(), n - 1)));
}
