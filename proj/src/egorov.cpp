#include "qcmd/egorov.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "qcmd/classical.hpp"
#include "qcmd/fit.hpp"
#include "qcmd/parallel.hpp"
#include "qcmd/phase_space.hpp"

namespace qcmd {

std::string to_string(EgorovPath path) { return path == EgorovPath::wigner ? "wigner" : "husimi"; }

EgorovPath egorov_path_from_string(const std::string& text) {
  if (text == "wigner") return EgorovPath::wigner;
  if (text == "husimi") return EgorovPath::husimi;
  throw std::invalid_argument("unknown path '" + text + "' (expected wigner or husimi)");
}

namespace {

// Weighted phase-space samples of the initial field.
struct Samples {
  RealVector x;
  RealVector xi;
  RealVector weight;
  double quadrature_error = 0.0;
};

Samples collect(const PhaseSpaceField& field, double weight_floor) {
  Samples s;
  s.quadrature_error = std::abs(field.integral() - 1.0);
  const double cell = field.dx * field.dxi;
  for (std::size_t i = 0; i < field.n_x(); ++i) {
    for (std::size_t k = 0; k < field.n_xi(); ++k) {
      const double w = field.at(i, k) * cell;
      if (std::abs(w) < weight_floor) continue;
      s.x.push_back(field.x_nodes[i]);
      s.xi.push_back(field.xi_nodes[k]);
      s.weight.push_back(w);
    }
  }
  return s;
}

Samples wigner_samples(const WaveFunction& psi, const EgorovOptions& options) {
  const PhaseSpaceBox window = default_husimi_box(psi, 2, options.wigner_half_width_sd);
  WignerOptions wopt;
  wopt.x_min = window.x_nodes.front();
  wopt.x_max = window.x_nodes.back();
  wopt.xi_min = window.xi_nodes.front();
  wopt.xi_max = window.xi_nodes.back();
  if (options.wigner_target_dx > 0.0) {
    const double stride = std::round(options.wigner_target_dx / psi.grid().spacing());
    wopt.row_stride = static_cast<std::size_t>(std::max(1.0, stride));
  }
  wopt.workers = options.workers;
  return collect(wigner_transform(psi, wopt), options.weight_floor);
}

Samples husimi_samples(const WaveFunction& psi, const EgorovOptions& options) {
  const PhaseSpaceBox box = default_husimi_box(psi, options.husimi_nodes, options.husimi_half_width_sd);
  return collect(husimi_function(psi, box, options.workers), options.weight_floor);
}

// Ensemble members with the coefficients that turn sums over members into the
// classical-side quadrature. With the composed Laplacian every sample brings
// four neighbours at (+-d, 0), (0, +-d), and
//   w (b - (h/4) Lap b) = w (1 + h/d^2) b(c) - w h/(4 d^2) sum_nbr b(nbr).
struct Members {
  RealVector x;
  RealVector xi;
  RealVector coefficient;
};

Members build_members(const Samples& s, EgorovPath path, double h, const EgorovOptions& options) {
  Members m;
  const bool stencil = path == EgorovPath::husimi && options.composed_laplacian;
  const std::size_t per = stencil ? 5 : 1;
  m.x.reserve(s.x.size() * per);
  m.xi.reserve(s.x.size() * per);
  m.coefficient.reserve(s.x.size() * per);
  const double d = options.laplacian_step;
  const double centre = 1.0 + h / (d * d);
  const double neighbour = -h / (4.0 * d * d);
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    const double w = s.weight[i];
    if (!stencil) {
      m.x.push_back(s.x[i]);
      m.xi.push_back(s.xi[i]);
      m.coefficient.push_back(w);
      continue;
    }
    const double dxs[5] = {0.0, d, -d, 0.0, 0.0};
    const double dxis[5] = {0.0, 0.0, 0.0, d, -d};
    for (int k = 0; k < 5; ++k) {
      m.x.push_back(s.x[i] + dxs[k]);
      m.xi.push_back(s.xi[i] + dxis[k]);
      m.coefficient.push_back(w * (k == 0 ? centre : neighbour));
    }
  }
  return m;
}

// Nuclear force for the Husimi path with the Laplacian applied after the
// flow: sum w (g - (h/4) d^2g/dx^2) with g = dV/dy, by central differences.
NuclearForce literal_husimi_force(const Potential& potential, RealVector weights, double h, double d) {
  return [potential, weights = std::move(weights), h, d](std::span<const double> x, double y) {
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double g = potential.grad_y(x[i], y);
      const double g2 = (potential.grad_y(x[i] + d, y) - 2.0 * g + potential.grad_y(x[i] - d, y)) / (d * d);
      sum += weights[i] * (g - 0.25 * h * g2);
    }
    return sum;
  };
}

ClassicalSide transport(const Observable& observable, const Samples& samples, EgorovPath path, double h,
                        double y0, double v0, const Potential& potential, double dt, std::size_t n,
                        const EgorovOptions& options) {
  const Members members = build_members(samples, path, h, options);
  const bool literal = path == EgorovPath::husimi && !options.composed_laplacian;
  RealVector x_final(members.x.size());
  RealVector xi_final(members.x.size());

  if (options.coupling == NuclearCoupling::mean_field) {
    ElectronEnsemble ensemble{members.x, members.xi, NuclearState{y0, v0}};
    const NuclearForce force = literal
                                   ? literal_husimi_force(potential, members.coefficient, h, options.laplacian_step)
                                   : weighted_mean_force(potential, members.coefficient);
    if (n > 0) stormer_verlet(ensemble, dt, n, potential, force);
    x_final = std::move(ensemble.x);
    xi_final = std::move(ensemble.xi);
  } else {
    parallel_for(members.x.size(), options.workers, [&](std::size_t i) {
      const ClassicalPoint q =
          n > 0 ? stormer_verlet(ClassicalPoint{members.x[i], members.xi[i], y0, v0}, dt, n, potential)
                : ClassicalPoint{members.x[i], members.xi[i], y0, v0};
      x_final[i] = q.x;
      xi_final[i] = q.xi;
    });
  }

  double sum = 0.0;
  for (std::size_t i = 0; i < x_final.size(); ++i) {
    double value = observable.symbol(x_final[i], xi_final[i]);
    if (literal) value -= 0.25 * h * observable.laplacian_at(x_final[i], xi_final[i]);
    sum += members.coefficient[i] * value;
  }
  return {sum, samples.quadrature_error, samples.x.size()};
}

void require_schwartz(const Observable& observable) {
  if (!observable.schwartz) {
    throw std::invalid_argument("observable '" + observable.name +
                                "' is not a Schwartz symbol; the phase-space path needs decay");
  }
}

struct Cell {
  double quantum = 0.0;
  ClassicalSide classical;
};

Cell egorov_cell(const Observable& observable, const RunConfig& cfg, EgorovPath path, const EgorovOptions& options,
                 ReferenceCache* cache) {
  require_schwartz(observable);
  const std::size_t n = cfg.T == 0.0 ? 0 : commensurate_steps(cfg.T, options.classical_dt);
  Cell cell;
  cell.classical = classical_expectation(observable, cfg, path, options.classical_dt, n, options);
  if (cache != nullptr) {
    cell.quantum = expectation(observable, cache->get(cfg).psi);
  } else {
    cell.quantum = expectation(observable, run_to_final(cfg, cfg.reference_dt).psi);
  }
  return cell;
}

}  // namespace

ClassicalSide classical_expectation(const Observable& observable, const RunConfig& cfg, EgorovPath path,
                                    double dt, std::size_t n_steps, const EgorovOptions& options) {
  require_schwartz(observable);
  const QcmdState initial = initial_state(cfg);
  const Samples samples =
      path == EgorovPath::wigner ? wigner_samples(initial.psi, options) : husimi_samples(initial.psi, options);
  return transport(observable, samples, path, cfg.h, cfg.y0, cfg.v0, potential_for(cfg), dt, n_steps, options);
}

double egorov_defect(const Observable& observable, const RunConfig& cfg, EgorovPath path,
                     const EgorovOptions& options, ReferenceCache* cache) {
  const Cell cell = egorov_cell(observable, cfg, path, options, cache);
  return std::abs(cell.quantum - cell.classical.value);
}

EgorovReport egorov_sweep(const Observable& observable, const RunConfig& cfg, const std::vector<double>& h_values,
                          EgorovPath path, const EgorovOptions& options, ReferenceCache* cache) {
  require_schwartz(observable);
  std::vector<Cell> cells(h_values.size());
  parallel_for(h_values.size(), options.workers, [&](std::size_t i) {
    RunConfig c = cfg;
    c.h = h_values[i];
    cells[i] = egorov_cell(observable, c, path, options, cache);
  });

  EgorovReport report;
  report.observable = observable.name;
  report.path = path;
  report.T = cfg.T;
  report.h_values = h_values;
  double floor = kMinQuadratureFloor;
  for (const Cell& cell : cells) {
    report.quantum_expectations.push_back(cell.quantum);
    report.classical_expectations.push_back(cell.classical.value);
    report.defects.push_back(std::abs(cell.quantum - cell.classical.value));
    report.quadrature_errors.push_back(cell.classical.quadrature_error);
    floor = std::max(floor, cell.classical.quadrature_error);
  }
  try {
    const SlopeFit fit = fit_loglog(report.h_values, report.defects, kFitFloorFactor * floor);
    report.fitted_slope = fit.slope;
    report.r_squared = fit.r_squared;
    report.fitted_points = fit.points;
  } catch (const std::invalid_argument&) {
    report.fitted_slope = std::numeric_limits<double>::quiet_NaN();
    report.r_squared = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

double splitting_identity_check(const Observable& observable, const RunConfig& cfg, double h, double dt,
                                std::size_t n, const EgorovOptions& options) {
  require_schwartz(observable);
  RunConfig c = cfg;
  c.h = h;
  QcmdState state = initial_state(c);
  if (n > 0) {
    const SplitStepPropagator propagator(state.psi.grid(), h, dt, potential_for(c));
    propagator.advance(state, n);
  }
  const double quantum = expectation(observable, state.psi);
  const ClassicalSide classical = classical_expectation(observable, c, EgorovPath::wigner, dt, n, options);
  return std::abs(quantum - classical.value);
}

}  // namespace qcmd
