#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>

#include "qcmd/potential.hpp"
#include "qcmd/propagator.hpp"

namespace qcmd {

/// Phase-space point of the classical limit: electron pair (x, xi) and its
/// own nuclear pair (y, v).
struct ClassicalPoint {
  double x = 0.0;
  double xi = 0.0;
  double y = 0.0;
  double v = 0.0;

  friend bool operator==(const ClassicalPoint&, const ClassicalPoint&) = default;
};

struct HamiltonianValue {
  double energy = 0.0;
};

/// xi^2/2 + v^2/2 + V(x, y).
HamiltonianValue classical_hamiltonian(const ClassicalPoint& p, const Potential& potential);

/// Free flight: x += xi dt, y += v dt.
ClassicalPoint flow_T(const ClassicalPoint& p, double dt);

/// Frozen-position kick: xi -= dt dV/dx, v -= dt dV/dy.
ClassicalPoint flow_V(const ClassicalPoint& p, double dt, const Potential& potential);

/// Kick(dt/2), drift(dt), kick(dt/2).
ClassicalPoint stormer_verlet_step(const ClassicalPoint& p, double dt, const Potential& potential);

/// n Stormer-Verlet steps of size dt.
ClassicalPoint stormer_verlet(const ClassicalPoint& p, double dt, std::size_t n,
                              const Potential& potential);

/// Largest substep the reference flow takes by default.
inline constexpr double kReferenceMaxStep = 1e-5;

/// ceil(t / kReferenceMaxStep), at least 1.
std::size_t default_fine_steps(double t);

/// Stand-in for the exact flow at time t: Stormer-Verlet with n_fine
/// substeps, accurate to O((t / n_fine)^2).
ClassicalPoint reference_flow(const ClassicalPoint& p, double t, const Potential& potential,
                              std::size_t n_fine);
ClassicalPoint reference_flow(const ClassicalPoint& p, double t, const Potential& potential);

using Matrix4 = std::array<std::array<double, 4>, 4>;

inline constexpr double kJacobianStep = 1e-6;

/// Central-difference Jacobian of n Stormer-Verlet steps, in (x, xi, y, v)
/// order: J[i][j] = d out_i / d in_j.
Matrix4 jacobian_of_flow(const ClassicalPoint& p, double dt, std::size_t n, const Potential& potential,
                         double step = kJacobianStep);

double determinant(const Matrix4& m);

// ---------------------------------------------------------------------------
// Mean-field ensemble: many electron points sharing one nucleus.

/// Electron phase-space samples that all feel the same nuclear trajectory.
struct ElectronEnsemble {
  RealVector x;
  RealVector xi;
  NuclearState nucleus;
};

/// Returns dV_E/dy for the ensemble's current electron positions and the
/// nuclear position y (the nucleus is kicked by minus this value).
using NuclearForce = std::function<double(std::span<const double> x, double y)>;

/// sum_i weight_i * dV/dy(x_i, y).
NuclearForce weighted_mean_force(const Potential& potential, RealVector weights);

/// One kick-drift-kick step of the ensemble. Electrons are kicked by
/// -dV/dx(x_i, y); the nucleus by -force(x, y).
void stormer_verlet_step(ElectronEnsemble& ensemble, double dt, const Potential& potential,
                         const NuclearForce& force);

void stormer_verlet(ElectronEnsemble& ensemble, double dt, std::size_t n, const Potential& potential,
                    const NuclearForce& force);

}  // namespace qcmd
