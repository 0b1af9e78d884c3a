#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "qcmd/grid.hpp"

namespace qcmd {

using ScalarField2 = std::function<double(double x, double y)>;

/**
 * Interaction potential V(x, y) between the electron coordinate x and the
 * nuclear coordinate y, with analytic first derivatives.
 */
struct Potential {
  std::string name;
  ScalarField2 value;
  ScalarField2 grad_x;
  ScalarField2 grad_y;
  /// Derivatives of order >= 2 are bounded (hypothesis of the Egorov estimates).
  bool bounded_higher_derivatives = true;
};

/// V = sin(x^2 + y^2).
Potential builtin_sin_quadratic();
/// V = x^2/2 + y^2/2.
Potential harmonic_potential();
/// V = 0.
Potential zero_potential();

/// Name -> factory lookup used by the command line.
class PotentialRegistry {
 public:
  using Factory = std::function<Potential()>;

  /// Registry preloaded with "sin_x2_y2", "harmonic" and "zero".
  static PotentialRegistry with_builtins();

  void add(const std::string& name, Factory factory);
  bool contains(const std::string& name) const;
  /// Throws std::invalid_argument listing the known names.
  Potential make(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, Factory> factories_;
};

/// d/dy of the Ehrenfest potential: quadrature of grad_y(x_j, y) |psi_j|^2.
double ehrenfest_potential_gradient(const Potential& potential, const WaveFunction& psi, double y);

/// Same quadrature for a precomputed density |psi_j|^2.
double ehrenfest_potential_gradient(const Potential& potential, const Grid& grid,
                                    std::span<const double> density, double y);

}  // namespace qcmd
