#pragma once

#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace qcmd {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;
using RealVector = std::vector<double>;

inline constexpr std::size_t kMinGridPoints = 8;
inline constexpr std::size_t kDefaultGridPointCap = std::size_t{1} << 22;

/**
 * Uniform periodic grid on [x_min, x_max).
 *
 * Nodes are x_j = x_min + j * spacing for j = 0..n_points-1; the right
 * endpoint is identified with x_min. n_points is a power of two >= 8.
 */
class Grid {
 public:
  Grid(double x_min, double x_max, std::size_t n_points);

  double x_min() const noexcept { return x_min_; }
  double x_max() const noexcept { return x_max_; }
  std::size_t n_points() const noexcept { return n_points_; }
  double spacing() const noexcept { return spacing_; }
  double length() const noexcept { return x_max_ - x_min_; }

  double node(std::size_t j) const noexcept {
    return x_min_ + static_cast<double>(j) * spacing_;
  }
  RealVector nodes() const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  double x_min_;
  double x_max_;
  std::size_t n_points_;
  double spacing_;
};

/// Grid on [-pi, pi) whose spacing is at most 2*pi*h / min_points_per_h.
/// n_points is the smallest power of two >= min_points_per_h / h; throws
/// std::invalid_argument for bad inputs and std::length_error past max_points.
Grid make_grid(double h, int min_points_per_h = 32,
               std::size_t max_points = kDefaultGridPointCap);

/// Electron wavefunction sampled on a periodic grid, with its semiclassical h.
class WaveFunction {
 public:
  WaveFunction(Grid grid, ComplexVector values, double h);

  const Grid& grid() const noexcept { return grid_; }
  double h() const noexcept { return h_; }
  std::span<const Complex> values() const noexcept { return values_; }
  std::span<Complex> values() noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

  const Complex& operator[](std::size_t j) const noexcept { return values_[j]; }
  Complex& operator[](std::size_t j) noexcept { return values_[j]; }

  /// |psi_j|^2 at every node.
  RealVector density() const;

  /// True when mass() is within `tolerance` of one.
  bool is_normalized(double tolerance = 1e-12) const;

  /// Rescales in place so that mass() == 1. Throws on a zero state.
  void normalize();

 private:
  Grid grid_;
  ComplexVector values_;
  double h_;
};

/// spacing * sum_j |psi_j|^2.
double mass(const WaveFunction& psi);

/// Wavenumbers in FFT layout: 0, 1, ..., n/2-1, -n/2, ..., -1, scaled by 2*pi/L.
RealVector fourier_modes(const Grid& grid);

/// Periodic trapezoid rule: spacing * sum_j f_j.
double quadrature(std::span<const double> f, const Grid& grid);
Complex quadrature(std::span<const Complex> f, const Grid& grid);

/// Smallest power of two >= value (value >= 1).
std::size_t next_power_of_two(double value);

}  // namespace qcmd
