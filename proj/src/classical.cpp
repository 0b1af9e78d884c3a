#include "qcmd/classical.hpp"

#include <cmath>
#include <stdexcept>

namespace qcmd {

HamiltonianValue classical_hamiltonian(const ClassicalPoint& p, const Potential& potential) {
  return {0.5 * p.xi * p.xi + 0.5 * p.v * p.v + potential.value(p.x, p.y)};
}

ClassicalPoint flow_T(const ClassicalPoint& p, double dt) {
  return {p.x + p.xi * dt, p.xi, p.y + p.v * dt, p.v};
}

ClassicalPoint flow_V(const ClassicalPoint& p, double dt, const Potential& potential) {
  return {p.x, p.xi - dt * potential.grad_x(p.x, p.y), p.y, p.v - dt * potential.grad_y(p.x, p.y)};
}

ClassicalPoint stormer_verlet_step(const ClassicalPoint& p, double dt, const Potential& potential) {
  return flow_V(flow_T(flow_V(p, 0.5 * dt, potential), dt), 0.5 * dt, potential);
}

ClassicalPoint stormer_verlet(const ClassicalPoint& p, double dt, std::size_t n,
                              const Potential& potential) {
  ClassicalPoint q = p;
  for (std::size_t s = 0; s < n; ++s) q = stormer_verlet_step(q, dt, potential);
  return q;
}

std::size_t default_fine_steps(double t) {
  const double steps = std::ceil(std::abs(t) / kReferenceMaxStep - 1e-9);
  return std::max<std::size_t>(1, static_cast<std::size_t>(steps));
}

ClassicalPoint reference_flow(const ClassicalPoint& p, double t, const Potential& potential,
                              std::size_t n_fine) {
  if (n_fine == 0) throw std::invalid_argument("reference_flow: n_fine must be >= 1");
  if (t == 0.0) return p;
  return stormer_verlet(p, t / static_cast<double>(n_fine), n_fine, potential);
}

ClassicalPoint reference_flow(const ClassicalPoint& p, double t, const Potential& potential) {
  return reference_flow(p, t, potential, default_fine_steps(t));
}

namespace {

std::array<double, 4> as_array(const ClassicalPoint& p) { return {p.x, p.xi, p.y, p.v}; }

ClassicalPoint from_array(const std::array<double, 4>& a) { return {a[0], a[1], a[2], a[3]}; }

}  // namespace

Matrix4 jacobian_of_flow(const ClassicalPoint& p, double dt, std::size_t n, const Potential& potential,
                         double step) {
  Matrix4 jac{};
  const auto base = as_array(p);
  for (std::size_t j = 0; j < 4; ++j) {
    auto plus = base;
    auto minus = base;
    plus[j] += step;
    minus[j] -= step;
    const auto out_plus = as_array(stormer_verlet(from_array(plus), dt, n, potential));
    const auto out_minus = as_array(stormer_verlet(from_array(minus), dt, n, potential));
    for (std::size_t i = 0; i < 4; ++i) jac[i][j] = (out_plus[i] - out_minus[i]) / (2.0 * step);
  }
  return jac;
}

double determinant(const Matrix4& m) {
  // Laplace expansion along the first row with 3x3 minors.
  auto minor3 = [&](std::size_t skip) {
    std::array<std::size_t, 3> cols{};
    for (std::size_t c = 0, k = 0; c < 4; ++c) {
      if (c != skip) cols[k++] = c;
    }
    const auto& a = m[1];
    const auto& b = m[2];
    const auto& c = m[3];
    return a[cols[0]] * (b[cols[1]] * c[cols[2]] - b[cols[2]] * c[cols[1]]) -
           a[cols[1]] * (b[cols[0]] * c[cols[2]] - b[cols[2]] * c[cols[0]]) +
           a[cols[2]] * (b[cols[0]] * c[cols[1]] - b[cols[1]] * c[cols[0]]);
  };
  double det = 0.0;
  for (std::size_t j = 0; j < 4; ++j) {
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
    det += sign * m[0][j] * minor3(j);
  }
  return det;
}

NuclearForce weighted_mean_force(const Potential& potential, RealVector weights) {
  return [potential, weights = std::move(weights)](std::span<const double> x, double y) {
    if (x.size() != weights.size()) {
      throw std::invalid_argument("weighted_mean_force: ensemble size changed");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sum += weights[i] * potential.grad_y(x[i], y);
    return sum;
  };
}

namespace {

void kick(ElectronEnsemble& e, double dt, const Potential& potential, const NuclearForce& force) {
  const double y = e.nucleus.y;
  for (std::size_t i = 0; i < e.x.size(); ++i) e.xi[i] -= dt * potential.grad_x(e.x[i], y);
  e.nucleus.v -= dt * force(e.x, y);
}

void drift(ElectronEnsemble& e, double dt) {
  for (std::size_t i = 0; i < e.x.size(); ++i) e.x[i] += dt * e.xi[i];
  e.nucleus.y += dt * e.nucleus.v;
}

}  // namespace

void stormer_verlet_step(ElectronEnsemble& ensemble, double dt, const Potential& potential,
                         const NuclearForce& force) {
  if (ensemble.x.size() != ensemble.xi.size()) {
    throw std::invalid_argument("ensemble: x and xi lengths differ");
  }
  kick(ensemble, 0.5 * dt, potential, force);
  drift(ensemble, dt);
  kick(ensemble, 0.5 * dt, potential, force);
}

void stormer_verlet(ElectronEnsemble& ensemble, double dt, std::size_t n, const Potential& potential,
                    const NuclearForce& force) {
  for (std::size_t s = 0; s < n; ++s) stormer_verlet_step(ensemble, dt, potential, force);
}

}  // namespace qcmd
