#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qcmd/classical.hpp"
#include "qcmd/grid.hpp"
#include "qcmd/phase_space.hpp"
#include "qcmd/potential.hpp"

namespace qcmd {

using Factor = std::function<double(double)>;

/// How the quantum expectation of an observable is evaluated on the grid.
enum class ObservableKind {
  position_multiplier,  ///< a(x, xi) = f(x): quadrature of f |psi|^2
  fourier_multiplier,   ///< a(x, xi) = g(xi): sum of g(h k) |psi_hat(k)|^2
  separable_schwartz,   ///< a(x, xi) = f(x) g(xi): Wigner-grid quadrature
};

/// Real phase-space symbol a(x, xi) in one of the three representable forms.
struct Observable {
  std::string name;
  ObservableKind kind = ObservableKind::position_multiplier;
  Factor position_factor;  ///< f(x); unused for fourier_multiplier
  Factor momentum_factor;  ///< g(xi); unused for position_multiplier
  Symbol laplacian;        ///< d^2a/dx^2 + d^2a/dxi^2
  bool schwartz = false;   ///< decays with all derivatives in (x, xi)

  double symbol(double x, double xi) const;
  double laplacian_at(double x, double xi) const { return laplacian(x, xi); }
};

inline constexpr double kLaplacianStep = 1e-4;

/// Five-point finite-difference Laplacian of `a` with step `step`.
Symbol finite_difference_laplacian(Symbol a, double step = kLaplacianStep);

/// f(x) multiplier; `second_derivative` is f''; falls back to finite differences.
Observable make_position_multiplier(std::string name, Factor f, Factor second_derivative = {},
                                    bool schwartz = false);
/// g(xi) Fourier multiplier; `second_derivative` is g''.
Observable make_fourier_multiplier(std::string name, Factor g, Factor second_derivative = {});
/// f(x) g(xi) with both factors decaying.
Observable make_separable_schwartz(std::string name, Factor f, Factor g, Factor f_second = {},
                                   Factor g_second = {});

/// position (x), momentum (xi), gaussian (e^{-4x^2}), xgaussian (x e^{-4x^2}),
/// kinetic (xi^2 / 2), in that order.
std::vector<Observable> builtin_observables();

/// Looks up a builtin by name; throws std::invalid_argument on unknown names.
Observable builtin_observable(const std::string& name);

/// <psi | op(a) | psi> for a normalized psi (|mass - 1| <= 1e-8, else std::domain_error).
double expectation(const Observable& observable, const WaveFunction& psi);

/// How a symbol is transported: fine-step reference flow or n Verlet steps of dt.
struct PullbackScheme {
  enum class Kind { exact, verlet };
  Kind kind = Kind::exact;
  double dt = 0.0;
  std::size_t fine_steps = 0;  ///< exact only; 0 selects default_fine_steps(t)

  static PullbackScheme exact(std::size_t fine_steps = 0) { return {Kind::exact, 0.0, fine_steps}; }
  static PullbackScheme verlet(double dt) { return {Kind::verlet, dt, 0}; }
};

using PhaseFunction = std::function<double(const ClassicalPoint&)>;

/// (x, xi, y, v) -> a(x(t), xi(t)) along the per-point classical flow.
PhaseFunction classical_pullback(const Observable& observable, double t, const Potential& potential,
                                 PullbackScheme scheme);

}  // namespace qcmd
