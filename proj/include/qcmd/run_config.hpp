#pragma once

#include <cstddef>
#include <future>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "qcmd/grid.hpp"
#include "qcmd/potential.hpp"
#include "qcmd/propagator.hpp"

namespace qcmd {

/// Everything needed to reproduce one simulation: initial packet, nucleus,
/// potential, grid resolution and step sizes.
struct RunConfig {
  double h = 0.04;
  double dt = 0.001;
  double T = 0.5;
  std::string potential_name = "sin_x2_y2";
  double alpha = 12.5;  ///< packet width parameter in exp(-alpha (x - x0)^2)
  double x0 = -1.0;
  double k0 = 50.0;
  double y0 = 1.0;
  double v0 = 0.0;
  int grid_points_per_h = 32;
  std::vector<std::string> observables = {"position", "momentum", "gaussian", "xgaussian", "kinetic"};
  double reference_dt = 1e-5;
  std::size_t max_grid_points = kDefaultGridPointCap;

  /// Throws std::invalid_argument when h is outside (0, 1], T < 0, steps are
  /// not positive, or T is not a whole number of dt or reference_dt steps.
  void validate() const;
};

Grid grid_for(const RunConfig& cfg);
Potential potential_for(const RunConfig& cfg);

inline constexpr double kInitialBoundaryTolerance = 1e-10;

/// Z exp(-alpha (x - x0)^2 + i k0 (x - x0)) normalized by the discrete mass,
/// with the nucleus at (y0, v0). Throws std::domain_error when |psi|^2 at
/// either end node exceeds 1e-10.
QcmdState initial_state(const RunConfig& cfg);

/// State at time cfg.T after Strang steps of size `dt`.
QcmdState run_to_final(const RunConfig& cfg, double dt);

/**
 * Memoized reference solutions (Strang with cfg.reference_dt up to cfg.T).
 *
 * Keyed by every field that affects the trajectory. Concurrent requests for
 * the same key compute it once; other callers block until it is ready.
 */
class ReferenceCache {
 public:
  const QcmdState& get(const RunConfig& cfg);
  std::size_t size() const;

 private:
  static std::string key(const RunConfig& cfg);

  mutable std::mutex mutex_;
  std::map<std::string, std::shared_future<QcmdState>> entries_;
};

}  // namespace qcmd
