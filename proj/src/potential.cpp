#include "qcmd/potential.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qcmd {

Potential builtin_sin_quadratic() {
  return Potential{
      .name = "sin_x2_y2",
      .value = [](double x, double y) { return std::sin(x * x + y * y); },
      .grad_x = [](double x, double y) { return 2.0 * x * std::cos(x * x + y * y); },
      .grad_y = [](double x, double y) { return 2.0 * y * std::cos(x * x + y * y); },
      .bounded_higher_derivatives = true,
  };
}

Potential harmonic_potential() {
  return Potential{
      .name = "harmonic",
      .value = [](double x, double y) { return 0.5 * (x * x + y * y); },
      .grad_x = [](double x, double) { return x; },
      .grad_y = [](double, double y) { return y; },
      .bounded_higher_derivatives = true,
  };
}

Potential zero_potential() {
  return Potential{
      .name = "zero",
      .value = [](double, double) { return 0.0; },
      .grad_x = [](double, double) { return 0.0; },
      .grad_y = [](double, double) { return 0.0; },
      .bounded_higher_derivatives = true,
  };
}

PotentialRegistry PotentialRegistry::with_builtins() {
  PotentialRegistry registry;
  registry.add("sin_x2_y2", builtin_sin_quadratic);
  registry.add("harmonic", harmonic_potential);
  registry.add("zero", zero_potential);
  return registry;
}

void PotentialRegistry::add(const std::string& name, Factory factory) {
  if (name.empty()) throw std::invalid_argument("potential registry: empty name");
  factories_[name] = std::move(factory);
}

bool PotentialRegistry::contains(const std::string& name) const {
  return factories_.contains(name);
}

Potential PotentialRegistry::make(const std::string& name) const {
  const auto it = factories_.find(name);
  if (it == factories_.end()) {
    std::ostringstream msg;
    msg << "unknown potential '" << name << "' (known:";
    for (const auto& [known, _] : factories_) msg << ' ' << known;
    msg << ')';
    throw std::invalid_argument(msg.str());
  }
  return it->second();
}

std::vector<std::string> PotentialRegistry::names() const {
  std::vector<std::string> out;
  out.reserve(factories_.size());
  for (const auto& [name, _] : factories_) out.push_back(name);
  return out;
}

double ehrenfest_potential_gradient(const Potential& potential, const Grid& grid,
                                    std::span<const double> density, double y) {
  if (density.size() != grid.n_points()) {
    throw std::invalid_argument("ehrenfest_potential_gradient: density length mismatch");
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < density.size(); ++j) {
    sum += potential.grad_y(grid.node(j), y) * density[j];
  }
  return grid.spacing() * sum;
}

double ehrenfest_potential_gradient(const Potential& potential, const WaveFunction& psi, double y) {
  const auto rho = psi.density();
  return ehrenfest_potential_gradient(potential, psi.grid(), rho, y);
}

}  // namespace qcmd
