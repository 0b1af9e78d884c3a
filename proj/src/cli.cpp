#include "qcmd/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <regex>
#include <sstream>

#include "qcmd/egorov.hpp"
#include "qcmd/experiments.hpp"
#include "qcmd/phase_space.hpp"

namespace qcmd {

double parse_real(const std::string& text) {
  static const std::regex power(R"(^\s*([+-]?)(\d+(?:\.\d*)?)\^([+-]?\d+)\s*$)");
  std::smatch m;
  if (std::regex_match(text, m, power)) {
    const double base = std::stod(m[2].str());
    const double value = std::pow(base, std::stod(m[3].str()));
    return m[1].str() == "-" ? -value : value;
  }
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw UsageError("not a number: '" + text + "'");
  }
  while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
  if (used != text.size()) throw UsageError("not a number: '" + text + "'");
  if (!std::isfinite(value)) throw UsageError("not a finite number: '" + text + "'");
  return value;
}

std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) throw UsageError("empty entry in list '" + text + "'");
    out.push_back(parse_real(item));
  }
  if (out.empty()) throw UsageError("empty list");
  return out;
}

namespace {

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Flags shared by every verb, kept as text so "2^-11" can be parsed exactly.
struct CommonFlags {
  std::string h = "0.04";
  std::string dt;
  std::string T = "0.5";
  std::string potential = "sin_x2_y2";
  std::string alpha = "12.5";
  std::string x0 = "-1";
  std::string k0 = "50";
  std::string y0 = "1";
  std::string v0 = "0";
  std::string observables = "position,momentum,gaussian,xgaussian,kinetic";
  std::string reference_dt = "1e-5";
  int points_per_h = 32;
  std::string out;
  std::size_t workers = 1;
};

void add_common(CLI::App* app, CommonFlags& f, const std::string& default_dt, const std::string& default_out) {
  f.dt = default_dt;
  f.out = default_out;
  app->add_option("--h", f.h, "semiclassical parameter h")->capture_default_str();
  app->add_option("--dt", f.dt, "time step")->capture_default_str();
  app->add_option("--T", f.T, "final time")->capture_default_str();
  app->add_option("--potential", f.potential, "potential name (sin_x2_y2, harmonic, zero)")->capture_default_str();
  app->add_option("--alpha", f.alpha, "packet width parameter")->capture_default_str();
  app->add_option("--x0", f.x0, "packet centre")->capture_default_str();
  app->add_option("--k0", f.k0, "packet wavenumber")->capture_default_str();
  app->add_option("--y0", f.y0, "initial nuclear position")->capture_default_str();
  app->add_option("--v0", f.v0, "initial nuclear velocity")->capture_default_str();
  app->add_option("--observables", f.observables, "comma-separated observable names")->capture_default_str();
  app->add_option("--reference-dt", f.reference_dt, "time step of the reference run")->capture_default_str();
  app->add_option("--points-per-h", f.points_per_h, "minimum grid points per h")->capture_default_str();
  app->add_option("--out", f.out, "output file; a manifest is written next to it")->capture_default_str();
  app->add_option("--workers", f.workers, "worker threads (0 = one per hardware thread)")->capture_default_str();
}

void require_commensurate(double T, double dt, const char* flag) {
  try {
    commensurate_steps(T, dt);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string(flag) + ": " + e.what());
  }
}

RunConfig config_from(const CommonFlags& f) {
  RunConfig cfg;
  cfg.h = parse_real(f.h);
  cfg.dt = parse_real(f.dt);
  cfg.T = parse_real(f.T);
  cfg.potential_name = f.potential;
  cfg.alpha = parse_real(f.alpha);
  cfg.x0 = parse_real(f.x0);
  cfg.k0 = parse_real(f.k0);
  cfg.y0 = parse_real(f.y0);
  cfg.v0 = parse_real(f.v0);
  cfg.observables = split_names(f.observables);
  cfg.reference_dt = parse_real(f.reference_dt);
  cfg.grid_points_per_h = f.points_per_h;

  if (!PotentialRegistry::with_builtins().contains(cfg.potential_name)) {
    throw UsageError("unknown potential '" + cfg.potential_name + "'");
  }
  for (const auto& name : cfg.observables) {
    try {
      builtin_observable(name);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  if (!(cfg.h > 0.0 && cfg.h <= 1.0)) throw UsageError("--h must lie in (0, 1]");
  if (!(cfg.T >= 0.0)) throw UsageError("--T must be non-negative");
  if (!(cfg.dt > 0.0)) throw UsageError("--dt must be positive");
  if (!(cfg.reference_dt > 0.0)) throw UsageError("--reference-dt must be positive");
  if (!(cfg.alpha > 0.0)) throw UsageError("--alpha must be positive");
  if (cfg.grid_points_per_h <= 0) throw UsageError("--points-per-h must be positive");
  require_commensurate(cfg.T, cfg.reference_dt, "--reference-dt");
  return cfg;
}

std::filesystem::path prepare_output(const std::string& out) {
  std::filesystem::path path(out);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  return path;
}

nlohmann::json fits_json(const std::map<std::string, SlopeFit>& fits) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [metric, fit] : fits) {
    j[metric] = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r_squared", fit.r_squared}, {"points", fit.points}};
  }
  return j;
}

void print_fits(std::ostream& out, const std::map<std::string, SlopeFit>& fits, const char* against) {
  for (const auto& [metric, fit] : fits) {
    out << "  " << std::left << std::setw(24) << metric << " slope vs " << against << " = " << std::fixed
        << std::setprecision(3) << fit.slope << "  R^2 = " << fit.r_squared << "  (" << fit.points << " points)\n";
    out << std::defaultfloat;
  }
}

void finish(std::ostream& out, const std::filesystem::path& data, const nlohmann::json& manifest) {
  const auto mpath = manifest_path_for(data);
  write_manifest(mpath, manifest);
  out << "wrote " << data.string() << " and " << mpath.string() << '\n';
}

// ---------------------------------------------------------------------------
// Verbs

int do_simulate(const CommonFlags& f, std::ostream& out) {
  const RunConfig cfg = config_from(f);
  require_commensurate(cfg.T, cfg.dt, "--dt");
  const auto path = prepare_output(f.out);
  const auto start = std::chrono::steady_clock::now();
  const QcmdState initial = initial_state(cfg);
  const QcmdState final_state = run_to_final(cfg, cfg.dt);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::ostringstream id;
  id << "simulate-h" << cfg.h << "-dt" << cfg.dt;
  const std::size_t n = initial.psi.size();
  std::vector<ErrorRecord> rows;
  auto add = [&](const std::string& metric, double at0, double atT) {
    rows.push_back({id.str(), cfg.h, cfg.dt, cfg.T, n, metric, at0, atT, std::abs(atT - at0), wall});
  };
  add("mass", mass(initial.psi), mass(final_state.psi));
  add("nuclear_y", initial.nuclear.y, final_state.nuclear.y);
  add("nuclear_v", initial.nuclear.v, final_state.nuclear.v);
  for (const auto& name : cfg.observables) {
    const Observable obs = builtin_observable(name);
    add("observable:" + name, expectation(obs, initial.psi), expectation(obs, final_state.psi));
  }
  CsvAppender csv(path);
  csv.append(rows);

  out << "simulate: h=" << cfg.h << " dt=" << cfg.dt << " T=" << cfg.T << " n=" << n << '\n';
  for (const auto& r : rows) {
    out << "  " << std::left << std::setw(24) << r.metric << " t=0: " << std::setprecision(12) << r.reference_value
        << "  t=T: " << r.numerical_value << '\n';
  }
  out << std::setprecision(6);
  finish(out, path, make_manifest("simulate", cfg, {{"out", path.string()}, {"workers", f.workers}}));
  return kExitOk;
}

int do_sweep_dt(const CommonFlags& f, const std::string& dt_list_text, std::ostream& out) {
  const RunConfig cfg = config_from(f);
  const auto dt_list = parse_real_list(dt_list_text);
  for (double dt : dt_list) require_commensurate(cfg.T, dt, "--dt-list");
  const auto path = prepare_output(f.out);
  CsvAppender csv(path);
  SweepOptions opts;
  opts.workers = f.workers;
  opts.sink = &csv;
  const SweepResult result = sweep_dt(cfg, dt_list, opts);
  out << "sweep-dt: h=" << cfg.h << " T=" << cfg.T << " reference dt=" << cfg.reference_dt << '\n';
  print_fits(out, result.fits, "dt");
  finish(out, path,
         make_manifest("sweep-dt", cfg,
                       {{"dt_list", dt_list}, {"fits", fits_json(result.fits)}, {"out", path.string()},
                        {"workers", f.workers}}));
  return kExitOk;
}

SweepMode parse_mode(const std::string& text) {
  if (text == "observables") return SweepMode::observables;
  if (text == "wavefunction") return SweepMode::wavefunction;
  if (text == "all") return SweepMode::all;
  throw UsageError("--mode must be observables, wavefunction or all");
}

int do_sweep_h(const CommonFlags& f, const std::string& h_list_text, const std::string& mode_text, std::ostream& out) {
  const RunConfig cfg = config_from(f);
  const auto h_list = parse_real_list(h_list_text);
  const SweepMode mode = parse_mode(mode_text);
  require_commensurate(cfg.T, cfg.dt, "--dt");
  const auto path = prepare_output(f.out);
  CsvAppender csv(path);
  SweepOptions opts;
  opts.workers = f.workers;
  opts.sink = &csv;
  const SweepResult result = sweep_h(cfg, h_list, mode, opts);
  out << "sweep-h: dt=" << cfg.dt << " T=" << cfg.T << " reference dt=" << cfg.reference_dt << '\n';
  print_fits(out, result.fits, "h");
  finish(out, path,
         make_manifest("sweep-h", cfg,
                       {{"h_list", h_list}, {"mode", mode_text}, {"fits", fits_json(result.fits)},
                        {"out", path.string()}, {"workers", f.workers}}));
  return kExitOk;
}

struct EgorovFlags {
  std::string observable = "gaussian";
  std::string path = "wigner";
  std::string h_list = "2^-4,2^-5,2^-6,2^-7,2^-8";
  std::string classical_dt = "1e-4";
  std::string coupling = "mean-field";
  std::string laplacian = "composed";
};

int do_egorov(const CommonFlags& f, const EgorovFlags& e, std::ostream& out) {
  const RunConfig cfg = config_from(f);
  const auto h_list = parse_real_list(e.h_list);
  EgorovPath path_kind{};
  try {
    path_kind = egorov_path_from_string(e.path);
  } catch (const std::invalid_argument& ex) {
    throw UsageError(ex.what());
  }
  Observable obs;
  try {
    obs = builtin_observable(e.observable);
  } catch (const std::invalid_argument& ex) {
    throw UsageError(ex.what());
  }
  if (!obs.schwartz) throw UsageError("--observable must be a Schwartz symbol (gaussian or xgaussian)");
  EgorovOptions opts;
  opts.classical_dt = parse_real(e.classical_dt);
  if (e.coupling == "mean-field") {
    opts.coupling = NuclearCoupling::mean_field;
  } else if (e.coupling == "per-point") {
    opts.coupling = NuclearCoupling::per_point;
  } else {
    throw UsageError("--coupling must be mean-field or per-point");
  }
  if (e.laplacian != "composed" && e.laplacian != "literal") {
    throw UsageError("--laplacian must be composed or literal");
  }
  opts.composed_laplacian = e.laplacian == "composed";
  opts.workers = f.workers;
  if (cfg.T > 0.0) require_commensurate(cfg.T, opts.classical_dt, "--classical-dt");

  const auto file = prepare_output(f.out);
  const auto start = std::chrono::steady_clock::now();
  const EgorovReport report = egorov_sweep(obs, cfg, h_list, path_kind, opts);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  CsvAppender csv(file);
  const std::string metric = "egorov:" + e.path + ":" + e.observable;
  for (std::size_t i = 0; i < report.h_values.size(); ++i) {
    RunConfig c = cfg;
    c.h = report.h_values[i];
    std::ostringstream id;
    id << "egorov-" << e.path << "-h" << c.h;
    csv.append(ErrorRecord{id.str(), c.h, opts.classical_dt, cfg.T, grid_for(c).n_points(), metric,
                           report.quantum_expectations[i], report.classical_expectations[i], report.defects[i],
                           wall / static_cast<double>(report.h_values.size())});
  }
  out << "egorov: observable=" << e.observable << " path=" << e.path << " T=" << cfg.T << '\n';
  for (std::size_t i = 0; i < report.h_values.size(); ++i) {
    out << "  h=" << std::setw(12) << report.h_values[i] << "  defect=" << std::scientific << std::setprecision(3)
        << report.defects[i] << std::defaultfloat << '\n';
  }
  out << "  fitted slope = " << std::setprecision(4) << report.fitted_slope << "  R^2 = " << report.r_squared << "  ("
      << report.fitted_points << " points)\n"
      << std::setprecision(6);
  finish(out, file,
         make_manifest("egorov", cfg,
                       {{"observable", e.observable},
                        {"path", e.path},
                        {"h_list", h_list},
                        {"classical_dt", opts.classical_dt},
                        {"coupling", e.coupling},
                        {"laplacian", e.laplacian},
                        {"fitted_slope", report.fitted_slope},
                        {"r_squared", report.r_squared},
                        {"fitted_points", report.fitted_points},
                        {"out", file.string()},
                        {"workers", f.workers}}));
  return kExitOk;
}

struct PhaseSpaceFlags {
  std::string kind = "wigner";
  std::size_t nodes = 128;
  std::string window_sd = "8";
  std::string target_dx = "0";
};

int do_phase_space(const CommonFlags& f, const PhaseSpaceFlags& p, std::ostream& out) {
  const RunConfig cfg = config_from(f);
  require_commensurate(cfg.T, cfg.dt, "--dt");
  FieldKind kind{};
  try {
    kind = field_kind_from_string(p.kind);
  } catch (const std::invalid_argument& ex) {
    throw UsageError(ex.what());
  }
  const double window_sd = parse_real(p.window_sd);
  const double target_dx = parse_real(p.target_dx);
  if (p.nodes < 2) throw UsageError("--nodes must be at least 2");
  const auto file = prepare_output(f.out);
  const QcmdState state = run_to_final(cfg, cfg.dt);

  PhaseSpaceField field;
  if (kind == FieldKind::wigner) {
    WignerOptions w;
    if (window_sd > 0.0) {
      const PhaseSpaceBox box = default_husimi_box(state.psi, 2, window_sd);
      w.x_min = box.x_nodes.front();
      w.x_max = box.x_nodes.back();
      w.xi_min = box.xi_nodes.front();
      w.xi_max = box.xi_nodes.back();
    }
    if (target_dx > 0.0) {
      w.row_stride = static_cast<std::size_t>(std::max(1.0, std::round(target_dx / state.psi.grid().spacing())));
    }
    w.workers = f.workers;
    field = wigner_transform(state.psi, w);
  } else {
    const PhaseSpaceBox box = default_husimi_box(state.psi, p.nodes, window_sd > 0.0 ? window_sd : 6.0);
    field = husimi_function(state.psi, box, f.workers);
  }
  save_field(file, field);
  out << "phase-space: kind=" << p.kind << " t=" << cfg.T << " nodes=" << field.n_x() << "x" << field.n_xi()
      << " integral=" << std::setprecision(12) << field.integral() << std::setprecision(6) << '\n';
  for (const auto& warning : field.warnings) out << "  warning: " << warning << '\n';
  finish(out, file,
         make_manifest("phase-space", cfg,
                       {{"kind", p.kind},
                        {"nodes", p.nodes},
                        {"window_sd", window_sd},
                        {"target_dx", target_dx},
                        {"integral", field.integral()},
                        {"out", file.string()},
                        {"workers", f.workers}}));
  return kExitOk;
}

int do_envelope(const CommonFlags& f, const std::string& h_text, const std::string& dt_text, std::ostream& out) {
  const RunConfig cfg = config_from(f);
  const auto h_list = parse_real_list(h_text);
  const auto dt_list = parse_real_list(dt_text);
  for (double dt : dt_list) require_commensurate(cfg.T, dt, "--dt-list");
  const auto file = prepare_output(f.out);
  CsvAppender csv(file);
  SweepOptions opts;
  opts.workers = f.workers;
  opts.sink = &csv;
  const auto records = sweep_lattice(cfg, h_list, dt_list, opts);

  std::map<std::string, double> sup;
  const Grid grid = grid_for(cfg);
  for (const auto& name : cfg.observables) {
    const Observable obs = builtin_observable(name);
    if (obs.kind == ObservableKind::position_multiplier) sup[name] = symbol_sup_norm(obs, grid);
  }
  const EnvelopeTable table = min_error_envelope(records, sup);

  auto table_path = file;
  table_path.replace_extension(".envelope.csv");
  std::ofstream tout(table_path);
  if (!tout) throw std::runtime_error("cannot open " + table_path.string());
  tout << "observable,h,dt,observable_error,wavefunction_proxy,envelope\n" << std::setprecision(17);
  for (const auto& r : table.rows) {
    tout << r.observable << ',' << r.h << ',' << r.dt << ',' << r.observable_error << ',' << r.wavefunction_proxy
         << ',' << r.envelope << '\n';
  }

  nlohmann::json worst = nlohmann::json::object();
  out << "envelope: worst case over h of min(observable error, 2 sup|a| wavefunction error)\n";
  for (const auto& wc : table.worst_cases) {
    worst[wc.observable] = {{"dt", wc.dt_values}, {"worst", wc.worst}, {"worst_h", wc.worst_h}};
    if (wc.fitted) {
      worst[wc.observable]["slope"] = wc.fit.slope;
      worst[wc.observable]["r_squared"] = wc.fit.r_squared;
      out << "  " << std::left << std::setw(12) << wc.observable << " slope vs dt = " << std::fixed
          << std::setprecision(3) << wc.fit.slope << std::defaultfloat << std::setprecision(6) << '\n';
    }
  }
  out << "wrote " << table_path.string() << '\n';
  finish(out, file,
         make_manifest("envelope", cfg,
                       {{"h_list", h_list},
                        {"dt_list", dt_list},
                        {"worst_case", worst},
                        {"envelope_table", table_path.string()},
                        {"out", file.string()},
                        {"workers", f.workers}}));
  return kExitOk;
}

std::string one_line(std::string text) {
  for (char& c : text) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return text;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ehrenfest (QCMD) time-splitting simulator and verification harness", "qcmd"};
  // "-h" would collide with --h, so help is long-form only.
  app.set_help_flag("--help", "print this help message and exit");
  app.require_subcommand(1);

  CommonFlags sim_flags, dt_flags, h_flags, egorov_flags, ps_flags, env_flags;

  auto* simulate = app.add_subcommand("simulate", "evolve one state and report expectations at t=0 and t=T");
  add_common(simulate, sim_flags, "0.001", "simulate.csv");

  auto* sweep_dt_cmd = app.add_subcommand("sweep-dt", "temporal convergence at fixed h");
  add_common(sweep_dt_cmd, dt_flags, "0.001", "sweep_dt.csv");
  std::string dt_list = "2^-6,2^-7,2^-8,2^-9,2^-10,2^-11";
  sweep_dt_cmd->add_option("--dt-list", dt_list, "comma-separated time steps")->capture_default_str();

  auto* sweep_h_cmd = app.add_subcommand("sweep-h", "error against h at fixed dt");
  add_common(sweep_h_cmd, h_flags, "0.001", "sweep_h.csv");
  std::string h_list = "2^-4,2^-5,2^-6,2^-7,2^-8,2^-9,2^-10";
  std::string mode = "all";
  sweep_h_cmd->add_option("--h-list", h_list, "comma-separated h values")->capture_default_str();
  sweep_h_cmd->add_option("--mode", mode, "observables, wavefunction or all")->capture_default_str();

  auto* egorov_cmd = app.add_subcommand("egorov", "quantum vs transported classical expectation against h");
  add_common(egorov_cmd, egorov_flags, "0.001", "egorov.csv");
  EgorovFlags eflags;
  egorov_cmd->add_option("--observable", eflags.observable, "gaussian or xgaussian")->capture_default_str();
  egorov_cmd->add_option("--path", eflags.path, "wigner or husimi")->capture_default_str();
  egorov_cmd->add_option("--h-list", eflags.h_list, "comma-separated h values")->capture_default_str();
  egorov_cmd->add_option("--classical-dt", eflags.classical_dt, "classical flow step")->capture_default_str();
  egorov_cmd->add_option("--coupling", eflags.coupling, "mean-field or per-point")->capture_default_str();
  egorov_cmd->add_option("--laplacian", eflags.laplacian, "husimi correction: composed or literal")
      ->capture_default_str();

  auto* ps_cmd = app.add_subcommand("phase-space", "dump the Wigner or Husimi field of psi(T)");
  add_common(ps_cmd, ps_flags, "0.001", "phase_space.txt");
  PhaseSpaceFlags pflags;
  ps_cmd->add_option("--kind", pflags.kind, "wigner or husimi")->capture_default_str();
  ps_cmd->add_option("--nodes", pflags.nodes, "husimi nodes per axis")->capture_default_str();
  ps_cmd->add_option("--window-sd", pflags.window_sd, "half-width of the box in standard deviations (0 = full)")
      ->capture_default_str();
  ps_cmd->add_option("--target-dx", pflags.target_dx, "wigner row spacing to subsample to (0 = every row)")
      ->capture_default_str();

  auto* env_cmd = app.add_subcommand("envelope", "min of observable and wavefunction error bounds over an (h, dt) lattice");
  add_common(env_cmd, env_flags, "0.001", "envelope.csv");
  std::string env_h = "2^-4,2^-5,2^-6,2^-7,2^-8";
  std::string env_dt = "2^-6,2^-7,2^-8,2^-9,2^-10";
  env_cmd->add_option("--h-list", env_h, "comma-separated h values")->capture_default_str();
  env_cmd->add_option("--dt-list", env_dt, "comma-separated time steps")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error=usage message=" << one_line(e.what()) << '\n';
    return kExitUsage;
  }

  try {
    if (simulate->parsed()) return do_simulate(sim_flags, out);
    if (sweep_dt_cmd->parsed()) return do_sweep_dt(dt_flags, dt_list, out);
    if (sweep_h_cmd->parsed()) return do_sweep_h(h_flags, h_list, mode, out);
    if (egorov_cmd->parsed()) return do_egorov(egorov_flags, eflags, out);
    if (ps_cmd->parsed()) return do_phase_space(ps_flags, pflags, out);
    if (env_cmd->parsed()) return do_envelope(env_flags, env_h, env_dt, out);
  } catch (const UsageError& e) {
    err << "error=usage message=" << one_line(e.what()) << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error=runtime message=" << one_line(e.what()) << '\n';
    return kExitRuntime;
  }
  err << "error=usage message=no command given\n";
  return kExitUsage;
}

}  // namespace qcmd
