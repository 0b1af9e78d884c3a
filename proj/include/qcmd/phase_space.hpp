#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qcmd/grid.hpp"

namespace qcmd {

/// Real function of the electronic phase-space pair (x, xi).
using Symbol = std::function<double(double x, double xi)>;

enum class FieldKind { wigner, husimi };

std::string to_string(FieldKind kind);
FieldKind field_kind_from_string(const std::string& text);

/**
 * Real field sampled on a tensor (x, xi) grid, stored row-major:
 * values[i * n_xi() + k] is the sample at (x_nodes[i], xi_nodes[k]).
 *
 * dx and dxi are the quadrature weights per node. They are stored rather
 * than derived because a subsampled Wigner field keeps the weight of the
 * thinned rows.
 */
struct PhaseSpaceField {
  FieldKind kind = FieldKind::wigner;
  double h = 0.0;
  RealVector x_nodes;
  RealVector xi_nodes;
  RealVector values;
  double dx = 0.0;
  double dxi = 0.0;
  std::vector<std::string> warnings;

  std::size_t n_x() const noexcept { return x_nodes.size(); }
  std::size_t n_xi() const noexcept { return xi_nodes.size(); }
  double at(std::size_t i, std::size_t k) const { return values[i * xi_nodes.size() + k]; }

  /// sum of values * dx * dxi.
  double integral() const;
  /// sqrt(sum of values^2 * dx * dxi).
  double l2_norm() const;
};

/// Minimal-uncertainty packet (pi h)^{-1/4} exp(-(y-x)^2/(2h) + i xi (y-x)/h).
struct CoherentState {
  double center_x = 0.0;
  double center_xi = 0.0;
  double h = 0.0;

  Complex operator()(double y) const;
  ComplexVector sample(const Grid& grid) const;
};

inline constexpr double kBoundaryDensityTolerance = 1e-8;
inline constexpr double kAliasingPointsPerH = 32.0;

/// Optional restriction of the Wigner output to a window and to every
/// `row_stride`-th x row. The full transform is n x n.
struct WignerOptions {
  std::optional<double> x_min;
  std::optional<double> x_max;
  std::optional<double> xi_min;
  std::optional<double> xi_max;
  std::size_t row_stride = 1;
  std::size_t workers = 1;
};

/**
 * Discrete h-scaled Wigner transform.
 *
 * Correlation offsets are whole grid steps, y_m = 2 m dx / h, so that
 * w(x_j, xi_k) = (2 pi)^{-1} dy sum_m psi_{j-m} conj(psi_{j+m}) e^{2 pi i km/n}
 * with dy = 2 dx / h and xi_k = k pi h / (n dx). Samples outside the grid
 * are treated as zero rather than wrapped.
 *
 * Throws std::invalid_argument when n < 32 / h and std::domain_error when
 * |psi|^2 at either end node exceeds 1e-8.
 */
PhaseSpaceField wigner_transform(const WaveFunction& psi, const WignerOptions& options = {});

/// sum_{j,k} a(x_j, xi_k) w_jk dx dxi over the full Wigner grid, computed
/// row by row without storing the field.
double wigner_integral(const WaveFunction& psi, const Symbol& a, std::size_t workers = 1);

/// Uniform node vector with `count` points from lo to hi inclusive.
RealVector linspace(double lo, double hi, std::size_t count);

struct PhaseSpaceBox {
  RealVector x_nodes;
  RealVector xi_nodes;
};

/// Box centred at (<x>, <p>) whose half-widths are `half_width_sd` standard
/// deviations of the Husimi marginals (variance + h/2 in each direction).
PhaseSpaceBox default_husimi_box(const WaveFunction& psi, std::size_t nodes = 128,
                                 double half_width_sd = 6.0);

/**
 * (2 pi h)^{-1} |<g_(x, xi) | psi>|^2 at every requested node, with the inner
 * product taken by grid quadrature. Requires h <= 0.25 (std::invalid_argument).
 * Nodes closer than 5 sqrt(h) to the grid ends are reported in `warnings`.
 */
PhaseSpaceField husimi_function(const WaveFunction& psi, const RealVector& x_nodes,
                                const RealVector& xi_nodes, std::size_t workers = 1);
PhaseSpaceField husimi_function(const WaveFunction& psi, const PhaseSpaceBox& box,
                                std::size_t workers = 1);

/// sum a(x_i, xi_k) w_ik dx dxi; throws std::invalid_argument on a Husimi field.
double wigner_expectation(const Symbol& a, const PhaseSpaceField& field);

/// sum (a - (h/4) lap_a)(x_i, xi_k) sigma_ik dx dxi; throws on a Wigner field.
double husimi_expectation(const Symbol& a, const Symbol& lap_a, const PhaseSpaceField& field, double h);

// Plain-text field format:
//   # qcmd-phase-space v1
//   kind <wigner|husimi>
//   h <value>
//   n_x <count>
//   n_xi <count>
//   dx <value>
//   dxi <value>
//   x_nodes <n_x values>
//   xi_nodes <n_xi values>
//   values
//   <n_x lines of n_xi values>
inline constexpr const char* kFieldFormatHeader = "# qcmd-phase-space v1";

void write_field(std::ostream& out, const PhaseSpaceField& field);
PhaseSpaceField read_field(std::istream& in);
void save_field(const std::filesystem::path& path, const PhaseSpaceField& field);
PhaseSpaceField load_field(const std::filesystem::path& path);

}  // namespace qcmd
