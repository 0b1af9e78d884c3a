#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "qcmd/observables.hpp"
#include "qcmd/run_config.hpp"

namespace qcmd {

enum class EgorovPath { wigner, husimi };

std::string to_string(EgorovPath path);
EgorovPath egorov_path_from_string(const std::string& text);

/// How the nucleus is coupled to the transported electron samples.
enum class NuclearCoupling {
  mean_field,  ///< one nucleus driven by the weighted force of all samples
  per_point,   ///< every sample carries its own nucleus from (y0, v0)
};

struct EgorovOptions {
  /// Step of the Stormer-Verlet flow standing in for the exact classical flow.
  double classical_dt = 1e-4;
  NuclearCoupling coupling = NuclearCoupling::mean_field;
  /// Husimi path: use the Laplacian of the transported symbol, Lap(a o Phi),
  /// from a stencil of transported neighbours. Otherwise (Lap a) o Phi.
  bool composed_laplacian = true;
  double laplacian_step = 1e-3;
  std::size_t husimi_nodes = 128;
  double husimi_half_width_sd = 6.0;
  /// Wigner samples are restricted to this many marginal standard deviations.
  double wigner_half_width_sd = 8.0;
  /// Keep every k-th Wigner row so the row spacing is close to this value;
  /// 0 keeps every grid row.
  double wigner_target_dx = 0.01;
  /// Samples whose quadrature weight is below this in magnitude are skipped.
  double weight_floor = 1e-16;
  std::size_t workers = 1;
};

/// Phase-space quadrature of the transported symbol for the initial state of
/// `cfg`, after n classical steps of size dt.
struct ClassicalSide {
  double value = 0.0;
  double quadrature_error = 0.0;  ///< |integral of the sampled field - 1|
  std::size_t samples = 0;
};

/// Classical side of the Egorov identity. Throws std::invalid_argument for
/// observables that are not Schwartz symbols.
ClassicalSide classical_expectation(const Observable& observable, const RunConfig& cfg, EgorovPath path,
                                    double dt, std::size_t n_steps, const EgorovOptions& options = {});

/// |<A>_{psi(T)} - classical side at T| with psi(T) from a Strang run at
/// cfg.reference_dt and the classical flow at options.classical_dt.
/// Uses cfg.h and cfg.T; `cache` (optional) shares the quantum reference run.
double egorov_defect(const Observable& observable, const RunConfig& cfg, EgorovPath path,
                     const EgorovOptions& options = {}, ReferenceCache* cache = nullptr);

struct EgorovReport {
  std::string observable;
  EgorovPath path = EgorovPath::wigner;
  double T = 0.0;
  std::vector<double> h_values;
  std::vector<double> quantum_expectations;
  std::vector<double> classical_expectations;
  std::vector<double> defects;
  std::vector<double> quadrature_errors;
  double fitted_slope = 0.0;
  double r_squared = 0.0;
  std::size_t fitted_points = 0;
};

/// Points whose defect is below this multiple of the quadrature error are
/// left out of the slope fit.
inline constexpr double kFitFloorFactor = 10.0;
inline constexpr double kMinQuadratureFloor = 1e-13;

/// egorov_defect for each h (cells run on options.workers threads), plus a
/// log-log slope fit of defect against h. fitted_slope is NaN when fewer than
/// two points clear the floor.
EgorovReport egorov_sweep(const Observable& observable, const RunConfig& cfg, const std::vector<double>& h_values,
                          EgorovPath path, const EgorovOptions& options = {}, ReferenceCache* cache = nullptr);

/// |<A>_{psi_n} - Wigner quadrature of a o (Stormer-Verlet dt)^n| where psi_n
/// is n Strang steps of size dt from the initial state of cfg at this h.
double splitting_identity_check(const Observable& observable, const RunConfig& cfg, double h, double dt,
                                std::size_t n, const EgorovOptions& options = {});

}  // namespace qcmd
