#include "qcmd/grid.hpp"

#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qcmd {

Grid::Grid(double x_min, double x_max, std::size_t n_points)
    : x_min_(x_min),
      x_max_(x_max),
      n_points_(n_points),
      spacing_((x_max - x_min) / static_cast<double>(n_points)) {
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_max > x_min)) {
    throw std::invalid_argument("grid: require finite x_min < x_max");
  }
  if (n_points < kMinGridPoints || !std::has_single_bit(n_points)) {
    throw std::invalid_argument("grid: n_points must be a power of two >= 8, got " +
                                std::to_string(n_points));
  }
}

RealVector Grid::nodes() const {
  RealVector x(n_points_);
  for (std::size_t j = 0; j < n_points_; ++j) x[j] = node(j);
  return x;
}

std::size_t next_power_of_two(double value) {
  if (!(value >= 1.0) || !std::isfinite(value)) {
    throw std::invalid_argument("next_power_of_two: value must be finite and >= 1");
  }
  // Guard against 32/0.04 landing a hair above 800 from rounding.
  const double target = value * (1.0 - 1e-13);
  std::size_t n = 1;
  while (static_cast<double>(n) < target) n <<= 1;
  return n;
}

Grid make_grid(double h, int min_points_per_h, std::size_t max_points) {
  if (!(h > 0.0 && h <= 1.0)) {
    throw std::invalid_argument("make_grid: h must lie in (0, 1]");
  }
  if (min_points_per_h < 8) {
    throw std::invalid_argument("make_grid: min_points_per_h must be >= 8");
  }
  const double wanted = static_cast<double>(min_points_per_h) / h;
  if (wanted > static_cast<double>(max_points)) {
    throw std::length_error("make_grid: resolution " + std::to_string(wanted) +
                            " points exceeds cap " + std::to_string(max_points));
  }
  const std::size_t n = next_power_of_two(wanted);
  if (n > max_points) {
    throw std::length_error("make_grid: " + std::to_string(n) + " points exceeds cap " +
                            std::to_string(max_points));
  }
  return Grid(-std::numbers::pi, std::numbers::pi, std::max(n, kMinGridPoints));
}

WaveFunction::WaveFunction(Grid grid, ComplexVector values, double h)
    : grid_(grid), values_(std::move(values)), h_(h) {
  if (values_.size() != grid_.n_points()) {
    throw std::invalid_argument("wavefunction: values length " + std::to_string(values_.size()) +
                                " != grid size " + std::to_string(grid_.n_points()));
  }
  if (!(h > 0.0 && h <= 1.0)) {
    throw std::invalid_argument("wavefunction: h must lie in (0, 1]");
  }
}

RealVector WaveFunction::density() const {
  RealVector rho(values_.size());
  for (std::size_t j = 0; j < values_.size(); ++j) rho[j] = std::norm(values_[j]);
  return rho;
}

bool WaveFunction::is_normalized(double tolerance) const {
  return std::abs(mass(*this) - 1.0) <= tolerance;
}

void WaveFunction::normalize() {
  const double m = mass(*this);
  if (!(m > 0.0) || !std::isfinite(m)) {
    throw std::domain_error("wavefunction: cannot normalize a state of mass " + std::to_string(m));
  }
  const double scale = 1.0 / std::sqrt(m);
  for (auto& z : values_) z *= scale;
}

double mass(const WaveFunction& psi) {
  double sum = 0.0;
  for (const auto& z : psi.values()) sum += std::norm(z);
  return psi.grid().spacing() * sum;
}

RealVector fourier_modes(const Grid& grid) {
  const std::size_t n = grid.n_points();
  const double scale = 2.0 * std::numbers::pi / grid.length();
  RealVector k(n);
  for (std::size_t m = 0; m < n; ++m) {
    const auto index = static_cast<long long>(m);
    const long long wave = m < n / 2 ? index : index - static_cast<long long>(n);
    k[m] = scale * static_cast<double>(wave);
  }
  return k;
}

double quadrature(std::span<const double> f, const Grid& grid) {
  if (f.size() != grid.n_points()) throw std::invalid_argument("quadrature: length mismatch");
  return grid.spacing() * std::accumulate(f.begin(), f.end(), 0.0);
}

Complex quadrature(std::span<const Complex> f, const Grid& grid) {
  if (f.size() != grid.n_points()) throw std::invalid_argument("quadrature: length mismatch");
  return grid.spacing() * std::accumulate(f.begin(), f.end(), Complex{});
}

}  // namespace qcmd
