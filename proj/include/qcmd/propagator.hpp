#pragma once

#include <cstddef>
#include <vector>

#include "qcmd/fft.hpp"
#include "qcmd/grid.hpp"
#include "qcmd/potential.hpp"

namespace qcmd {

/// Classical nucleus: position y and velocity v.
struct NuclearState {
  double y = 0.0;
  double v = 0.0;
};

/// Joint electron/nucleus state of the Ehrenfest system at one instant.
struct QcmdState {
  WaveFunction psi;
  NuclearState nuclear;
  double time = 0.0;
};

enum class SplittingScheme { strang, lie };

/// Kinetic sub-flow: psi_hat(k) *= exp(-i h dt k^2 / 2), y += v dt.
QcmdState kinetic_step(const QcmdState& state, double dt);

/// Potential sub-flow: psi *= exp(-i dt V(x, y) / h), v -= dt * d/dy V_Ehrenfest.
/// |psi|^2 is invariant under this flow, so the force is exact.
QcmdState potential_step(const QcmdState& state, double dt, const Potential& potential);

/// Symmetric splitting: potential(dt/2), kinetic(dt), potential(dt/2).
QcmdState strang_step(const QcmdState& state, double dt, const Potential& potential);

/// First-order splitting: kinetic(dt), then potential(dt).
QcmdState lie_step(const QcmdState& state, double dt, const Potential& potential);

/**
 * Reusable stepper for a fixed (grid, h, dt, potential).
 *
 * Holds the FFT plan and the kinetic multipliers, and updates states in
 * place. advance() merges the trailing half-kick of one Strang step with the
 * leading half-kick of the next; both act at the same nuclear position with
 * the same density, so the merge is exact up to rounding.
 */
class SplitStepPropagator {
 public:
  SplitStepPropagator(const Grid& grid, double h, double dt, Potential potential,
                      SplittingScheme scheme = SplittingScheme::strang);

  double dt() const noexcept { return dt_; }
  SplittingScheme scheme() const noexcept { return scheme_; }

  /// One step of the configured scheme.
  void step(QcmdState& state) const;

  /// n_steps steps; state.time advances to start + n_steps * dt.
  void advance(QcmdState& state, std::size_t n_steps) const;

  void kinetic(QcmdState& state, double fraction) const;
  void potential(QcmdState& state, double fraction) const;

 private:
  Grid grid_;
  double h_;
  double dt_;
  Potential potential_;
  SplittingScheme scheme_;
  FourierTransform fft_;
  RealVector wavenumbers_;
  ComplexVector kinetic_full_;
};

enum class TrajectoryStorage { checkpoints, full };

/// Number of steps n with n * dt == t_final; throws std::invalid_argument
/// when t_final / dt is not an integer to within 1e-9 relative.
std::size_t commensurate_steps(double t_final, double dt);

/**
 * Evolves `initial` to initial.time + t_final in n_steps equal steps of
 * t_final / n_steps. Returns [initial, final] in checkpoint mode (just
 * [initial] when n_steps == 0) or every intermediate state in full mode.
 */
std::vector<QcmdState> evolve(const QcmdState& initial, double t_final, std::size_t n_steps,
                              const Potential& potential,
                              TrajectoryStorage storage = TrajectoryStorage::checkpoints,
                              SplittingScheme scheme = SplittingScheme::strang);

/// dt-based overload; rejects non-commensurate (dt, t_final).
std::vector<QcmdState> evolve_with_dt(const QcmdState& initial, double dt, double t_final,
                                      const Potential& potential,
                                      TrajectoryStorage storage = TrajectoryStorage::checkpoints,
                                      SplittingScheme scheme = SplittingScheme::strang);

}  // namespace qcmd
