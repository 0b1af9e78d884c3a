#include "qcmd/propagator.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qcmd {
namespace {

void apply_kinetic(WaveFunction& psi, NuclearState& nuclear, double dt, const FourierTransform& fft,
                   std::span<const double> wavenumbers) {
  auto values = psi.values();
  fft.forward(values);
  const double rate = -0.5 * psi.h() * dt;
  for (std::size_t m = 0; m < values.size(); ++m) {
    values[m] *= std::polar(1.0, rate * wavenumbers[m] * wavenumbers[m]);
  }
  fft.inverse(values);
  nuclear.y += nuclear.v * dt;
}

void apply_kinetic_multiplier(WaveFunction& psi, NuclearState& nuclear, double dt,
                              const FourierTransform& fft, std::span<const Complex> multiplier) {
  auto values = psi.values();
  fft.forward(values);
  for (std::size_t m = 0; m < values.size(); ++m) values[m] *= multiplier[m];
  fft.inverse(values);
  nuclear.y += nuclear.v * dt;
}

// Phase rotation plus velocity kick. The force uses |psi|^2, which this flow
// leaves unchanged, so it is accumulated in the same pass.
void apply_potential(WaveFunction& psi, NuclearState& nuclear, double dt, const Potential& potential) {
  const Grid& grid = psi.grid();
  const double y = nuclear.y;
  const double phase_rate = -dt / psi.h();
  auto values = psi.values();
  double force = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j) {
    const double x = grid.node(j);
    force += potential.grad_y(x, y) * std::norm(values[j]);
    values[j] *= std::polar(1.0, phase_rate * potential.value(x, y));
  }
  nuclear.v -= dt * grid.spacing() * force;
}

}  // namespace

QcmdState kinetic_step(const QcmdState& state, double dt) {
  QcmdState out = state;
  if (dt == 0.0) return out;
  const FourierTransform fft(state.psi.size());
  const auto k = fourier_modes(state.psi.grid());
  apply_kinetic(out.psi, out.nuclear, dt, fft, k);
  out.time += dt;
  return out;
}

QcmdState potential_step(const QcmdState& state, double dt, const Potential& potential) {
  QcmdState out = state;
  apply_potential(out.psi, out.nuclear, dt, potential);
  out.time += dt;
  return out;
}

QcmdState strang_step(const QcmdState& state, double dt, const Potential& potential) {
  QcmdState out = state;
  const FourierTransform fft(state.psi.size());
  const auto k = fourier_modes(state.psi.grid());
  apply_potential(out.psi, out.nuclear, 0.5 * dt, potential);
  apply_kinetic(out.psi, out.nuclear, dt, fft, k);
  apply_potential(out.psi, out.nuclear, 0.5 * dt, potential);
  out.time = state.time + dt;
  return out;
}

QcmdState lie_step(const QcmdState& state, double dt, const Potential& potential) {
  QcmdState out = state;
  const FourierTransform fft(state.psi.size());
  const auto k = fourier_modes(state.psi.grid());
  apply_kinetic(out.psi, out.nuclear, dt, fft, k);
  apply_potential(out.psi, out.nuclear, dt, potential);
  out.time = state.time + dt;
  return out;
}

SplitStepPropagator::SplitStepPropagator(const Grid& grid, double h, double dt, Potential potential,
                                         SplittingScheme scheme)
    : grid_(grid),
      h_(h),
      dt_(dt),
      potential_(std::move(potential)),
      scheme_(scheme),
      fft_(grid.n_points()),
      wavenumbers_(fourier_modes(grid)),
      kinetic_full_(grid.n_points()) {
  if (!std::isfinite(dt) || dt == 0.0) {
    throw std::invalid_argument("propagator: dt must be finite and nonzero");
  }
  const double rate = -0.5 * h * dt;
  for (std::size_t m = 0; m < kinetic_full_.size(); ++m) {
    kinetic_full_[m] = std::polar(1.0, rate * wavenumbers_[m] * wavenumbers_[m]);
  }
}

void SplitStepPropagator::kinetic(QcmdState& state, double fraction) const {
  if (fraction == 1.0) {
    apply_kinetic_multiplier(state.psi, state.nuclear, dt_, fft_, kinetic_full_);
  } else {
    apply_kinetic(state.psi, state.nuclear, fraction * dt_, fft_, wavenumbers_);
  }
}

void SplitStepPropagator::potential(QcmdState& state, double fraction) const {
  apply_potential(state.psi, state.nuclear, fraction * dt_, potential_);
}

void SplitStepPropagator::step(QcmdState& state) const {
  if (state.psi.grid() != grid_ || state.psi.h() != h_) {
    throw std::invalid_argument("propagator: state does not match the propagator grid or h");
  }
  const double start = state.time;
  if (scheme_ == SplittingScheme::strang) {
    potential(state, 0.5);
    kinetic(state, 1.0);
    potential(state, 0.5);
  } else {
    kinetic(state, 1.0);
    potential(state, 1.0);
  }
  state.time = start + dt_;
}

void SplitStepPropagator::advance(QcmdState& state, std::size_t n_steps) const {
  if (n_steps == 0) return;
  if (state.psi.grid() != grid_ || state.psi.h() != h_) {
    throw std::invalid_argument("propagator: state does not match the propagator grid or h");
  }
  const double start = state.time;
  if (scheme_ == SplittingScheme::lie) {
    for (std::size_t s = 0; s < n_steps; ++s) {
      kinetic(state, 1.0);
      potential(state, 1.0);
    }
  } else {
    potential(state, 0.5);
    for (std::size_t s = 0; s < n_steps; ++s) {
      kinetic(state, 1.0);
      potential(state, s + 1 == n_steps ? 0.5 : 1.0);
    }
  }
  state.time = start + static_cast<double>(n_steps) * dt_;
}

std::size_t commensurate_steps(double t_final, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("dt must be positive and finite");
  }
  if (!(t_final >= 0.0) || !std::isfinite(t_final)) {
    throw std::invalid_argument("t_final must be non-negative and finite");
  }
  const double ratio = t_final / dt;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw std::invalid_argument("dt=" + std::to_string(dt) + " does not divide T=" +
                                std::to_string(t_final) + " into an integer number of steps");
  }
  return static_cast<std::size_t>(rounded);
}

std::vector<QcmdState> evolve(const QcmdState& initial, double t_final, std::size_t n_steps,
                              const Potential& potential, TrajectoryStorage storage,
                              SplittingScheme scheme) {
  std::vector<QcmdState> trajectory{initial};
  if (n_steps == 0) return trajectory;
  if (!(t_final > 0.0)) throw std::invalid_argument("evolve: t_final must be positive when n_steps > 0");
  const double dt = t_final / static_cast<double>(n_steps);
  const SplitStepPropagator propagator(initial.psi.grid(), initial.psi.h(), dt, potential, scheme);
  QcmdState state = initial;
  if (storage == TrajectoryStorage::full) {
    trajectory.reserve(n_steps + 1);
    for (std::size_t s = 1; s <= n_steps; ++s) {
      propagator.step(state);
      state.time = initial.time + static_cast<double>(s) * dt;
      trajectory.push_back(state);
    }
  } else {
    propagator.advance(state, n_steps);
    state.time = initial.time + t_final;
    trajectory.push_back(std::move(state));
  }
  return trajectory;
}

std::vector<QcmdState> evolve_with_dt(const QcmdState& initial, double dt, double t_final,
                                      const Potential& potential, TrajectoryStorage storage,
                                      SplittingScheme scheme) {
  const std::size_t n = commensurate_steps(t_final, dt);
  return evolve(initial, t_final, n, potential, storage, scheme);
}

}  // namespace qcmd
