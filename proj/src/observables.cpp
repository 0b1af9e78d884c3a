#include "qcmd/observables.hpp"

#include <cmath>
#include <stdexcept>

#include "qcmd/fft.hpp"
#include "qcmd/phase_space.hpp"
#include "qcmd/propagator.hpp"

namespace qcmd {

double Observable::symbol(double x, double xi) const {
  switch (kind) {
    case ObservableKind::position_multiplier:
      return position_factor(x);
    case ObservableKind::fourier_multiplier:
      return momentum_factor(xi);
    case ObservableKind::separable_schwartz:
      return position_factor(x) * momentum_factor(xi);
  }
  return 0.0;
}

Symbol finite_difference_laplacian(Symbol a, double step) {
  return [a = std::move(a), step](double x, double xi) {
    const double centre = a(x, xi);
    return (a(x + step, xi) + a(x - step, xi) + a(x, xi + step) + a(x, xi - step) - 4.0 * centre) /
           (step * step);
  };
}

namespace {

Factor second_derivative_or_fd(const Factor& f, Factor second) {
  if (second) return second;
  return [f](double s) {
    constexpr double d = kLaplacianStep;
    return (f(s + d) - 2.0 * f(s) + f(s - d)) / (d * d);
  };
}

}  // namespace

Observable make_position_multiplier(std::string name, Factor f, Factor second_derivative,
                                    bool schwartz) {
  Observable obs;
  obs.name = std::move(name);
  obs.kind = ObservableKind::position_multiplier;
  auto f2 = second_derivative_or_fd(f, std::move(second_derivative));
  obs.position_factor = std::move(f);
  obs.laplacian = [f2](double x, double) { return f2(x); };
  obs.schwartz = schwartz;
  return obs;
}

Observable make_fourier_multiplier(std::string name, Factor g, Factor second_derivative) {
  Observable obs;
  obs.name = std::move(name);
  obs.kind = ObservableKind::fourier_multiplier;
  auto g2 = second_derivative_or_fd(g, std::move(second_derivative));
  obs.momentum_factor = std::move(g);
  obs.laplacian = [g2](double, double xi) { return g2(xi); };
  return obs;
}

Observable make_separable_schwartz(std::string name, Factor f, Factor g, Factor f_second,
                                   Factor g_second) {
  Observable obs;
  obs.name = std::move(name);
  obs.kind = ObservableKind::separable_schwartz;
  auto f2 = second_derivative_or_fd(f, std::move(f_second));
  auto g2 = second_derivative_or_fd(g, std::move(g_second));
  obs.laplacian = [f, g, f2, g2](double x, double xi) { return f2(x) * g(xi) + f(x) * g2(xi); };
  obs.position_factor = std::move(f);
  obs.momentum_factor = std::move(g);
  obs.schwartz = true;
  return obs;
}

std::vector<Observable> builtin_observables() {
  std::vector<Observable> out;
  out.push_back(make_position_multiplier(
      "position", [](double x) { return x; }, [](double) { return 0.0; }));
  out.push_back(make_fourier_multiplier(
      "momentum", [](double xi) { return xi; }, [](double) { return 0.0; }));
  out.push_back(make_position_multiplier(
      "gaussian", [](double x) { return std::exp(-4.0 * x * x); },
      [](double x) { return (64.0 * x * x - 8.0) * std::exp(-4.0 * x * x); }, true));
  // d^2/dx^2 [x e^{-4x^2}] = (64 x^3 - 24 x) e^{-4x^2}
  out.push_back(make_position_multiplier(
      "xgaussian", [](double x) { return x * std::exp(-4.0 * x * x); },
      [](double x) { return (64.0 * x * x * x - 24.0 * x) * std::exp(-4.0 * x * x); }, true));
  out.push_back(make_fourier_multiplier(
      "kinetic", [](double xi) { return 0.5 * xi * xi; }, [](double) { return 1.0; }));
  return out;
}

Observable builtin_observable(const std::string& name) {
  for (auto& obs : builtin_observables()) {
    if (obs.name == name) return obs;
  }
  throw std::invalid_argument("unknown observable '" + name +
                              "' (known: position momentum gaussian xgaussian kinetic)");
}

double expectation(const Observable& observable, const WaveFunction& psi) {
  const double m = mass(psi);
  if (std::abs(m - 1.0) > 1e-8) {
    throw std::domain_error("expectation: wavefunction is not normalized (mass " + std::to_string(m) + ")");
  }
  const Grid& grid = psi.grid();
  switch (observable.kind) {
    case ObservableKind::position_multiplier: {
      double sum = 0.0;
      for (std::size_t j = 0; j < psi.size(); ++j) {
        sum += observable.position_factor(grid.node(j)) * std::norm(psi[j]);
      }
      return grid.spacing() * sum;
    }
    case ObservableKind::fourier_multiplier: {
      ComplexVector coeffs(psi.values().begin(), psi.values().end());
      const FourierTransform fft(coeffs.size());
      fft.forward(coeffs);
      const auto k = fourier_modes(grid);
      // Parseval: sum |F_m|^2 = n sum |psi_j|^2, so dx/n sum g |F_m|^2 -> <g>.
      double sum = 0.0;
      for (std::size_t m = 0; m < coeffs.size(); ++m) {
        sum += observable.momentum_factor(psi.h() * k[m]) * std::norm(coeffs[m]);
      }
      return grid.spacing() * sum / static_cast<double>(coeffs.size());
    }
    case ObservableKind::separable_schwartz:
      return wigner_integral(psi, [&](double x, double xi) { return observable.symbol(x, xi); });
  }
  return 0.0;
}

PhaseFunction classical_pullback(const Observable& observable, double t, const Potential& potential,
                                 PullbackScheme scheme) {
  if (!(t >= 0.0)) throw std::invalid_argument("classical_pullback: t must be >= 0");
  if (t == 0.0) {
    return [observable](const ClassicalPoint& p) { return observable.symbol(p.x, p.xi); };
  }
  if (scheme.kind == PullbackScheme::Kind::verlet) {
    const std::size_t n = commensurate_steps(t, scheme.dt);
    const double dt = t / static_cast<double>(n);
    return [observable, potential, dt, n](const ClassicalPoint& p) {
      const ClassicalPoint q = stormer_verlet(p, dt, n, potential);
      return observable.symbol(q.x, q.xi);
    };
  }
  const std::size_t fine = scheme.fine_steps == 0 ? default_fine_steps(t) : scheme.fine_steps;
  return [observable, potential, t, fine](const ClassicalPoint& p) {
    const ClassicalPoint q = reference_flow(p, t, potential, fine);
    return observable.symbol(q.x, q.xi);
  };
}

}  // namespace qcmd
