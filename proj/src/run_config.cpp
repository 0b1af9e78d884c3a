#include "qcmd/run_config.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qcmd {

void RunConfig::validate() const {
  if (!(h > 0.0 && h <= 1.0)) throw std::invalid_argument("h must lie in (0, 1]");
  if (!(T >= 0.0) || !std::isfinite(T)) throw std::invalid_argument("T must be non-negative");
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (grid_points_per_h <= 0) throw std::invalid_argument("points per h must be positive");
  commensurate_steps(T, dt);
  commensurate_steps(T, reference_dt);
}

Grid grid_for(const RunConfig& cfg) { return make_grid(cfg.h, cfg.grid_points_per_h, cfg.max_grid_points); }

Potential potential_for(const RunConfig& cfg) {
  return PotentialRegistry::with_builtins().make(cfg.potential_name);
}

QcmdState initial_state(const RunConfig& cfg) {
  if (!(cfg.h > 0.0 && cfg.h <= 1.0)) throw std::invalid_argument("h must lie in (0, 1]");
  if (!(cfg.alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  const Grid grid = grid_for(cfg);
  ComplexVector values(grid.n_points());
  for (std::size_t j = 0; j < values.size(); ++j) {
    const double d = grid.node(j) - cfg.x0;
    values[j] = std::polar(std::exp(-cfg.alpha * d * d), cfg.k0 * d);
  }
  WaveFunction psi(grid, std::move(values), cfg.h);
  psi.normalize();
  const double edge = std::max(std::norm(psi[0]), std::norm(psi[psi.size() - 1]));
  if (edge > kInitialBoundaryTolerance) {
    std::ostringstream msg;
    msg << "initial packet is not contained in the domain (boundary density " << edge << ")";
    throw std::domain_error(msg.str());
  }
  return QcmdState{std::move(psi), NuclearState{cfg.y0, cfg.v0}, 0.0};
}

QcmdState run_to_final(const RunConfig& cfg, double dt) {
  QcmdState state = initial_state(cfg);
  const std::size_t n = commensurate_steps(cfg.T, dt);
  if (n == 0) return state;
  const SplitStepPropagator propagator(state.psi.grid(), cfg.h, cfg.T / static_cast<double>(n),
                                       potential_for(cfg));
  propagator.advance(state, n);
  state.time = cfg.T;
  return state;
}

std::string ReferenceCache::key(const RunConfig& cfg) {
  std::ostringstream out;
  out.precision(17);
  out << cfg.h << '|' << cfg.T << '|' << cfg.potential_name << '|' << cfg.alpha << '|' << cfg.x0 << '|'
      << cfg.k0 << '|' << cfg.y0 << '|' << cfg.v0 << '|' << cfg.grid_points_per_h << '|' << cfg.reference_dt;
  return out.str();
}

const QcmdState& ReferenceCache::get(const RunConfig& cfg) {
  std::shared_future<QcmdState> future;
  std::promise<QcmdState> promise;
  bool owner = false;
  {
    std::lock_guard lock(mutex_);
    const std::string k = key(cfg);
    auto it = entries_.find(k);
    if (it == entries_.end()) {
      future = promise.get_future().share();
      entries_.emplace(k, future);
      owner = true;
    } else {
      future = it->second;
    }
  }
  if (owner) {
    try {
      promise.set_value(run_to_final(cfg, cfg.reference_dt));
    } catch (...) {
      promise.set_exception(std::current_exception());
    }
  }
  // The shared state lives in the map, so the reference stays valid.
  return future.get();
}

std::size_t ReferenceCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

}  // namespace qcmd
