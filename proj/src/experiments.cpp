#include "qcmd/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <sstream>
#include <stdexcept>

#include "qcmd/parallel.hpp"

namespace qcmd {

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string format_number(double value) {
  std::ostringstream out;
  out.precision(17);
  out << value;
  return out.str();
}

double parse_number(const std::string& field, const char* name) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(field, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != field.size()) {
    throw std::runtime_error(std::string("csv: bad ") + name + " '" + field + "'");
  }
  return value;
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string to_csv_row(const ErrorRecord& r) {
  if (r.run_id.find(',') != std::string::npos || r.metric.find(',') != std::string::npos) {
    throw std::invalid_argument("csv: run_id and metric must not contain commas");
  }
  std::ostringstream wall;
  wall.setf(std::ios::fixed);
  wall.precision(6);
  wall << r.wall_time_seconds;
  return r.run_id + ',' + format_number(r.h) + ',' + format_number(r.dt) + ',' + format_number(r.T) + ',' +
         std::to_string(r.n_points) + ',' + r.metric + ',' + format_number(r.reference_value) + ',' +
         format_number(r.numerical_value) + ',' + format_number(r.abs_error) + ',' + wall.str();
}

ErrorRecord parse_csv_row(const std::string& line) {
  const auto f = split_commas(line);
  if (f.size() != 10) {
    throw std::runtime_error("csv: expected 10 fields, found " + std::to_string(f.size()));
  }
  ErrorRecord r;
  r.run_id = f[0];
  r.h = parse_number(f[1], "h");
  r.dt = parse_number(f[2], "dt");
  r.T = parse_number(f[3], "T");
  const double n = parse_number(f[4], "n_points");
  if (n < 0 || n != std::floor(n)) throw std::runtime_error("csv: bad n_points '" + f[4] + "'");
  r.n_points = static_cast<std::size_t>(n);
  r.metric = f[5];
  r.reference_value = parse_number(f[6], "reference_value");
  r.numerical_value = parse_number(f[7], "numerical_value");
  r.abs_error = parse_number(f[8], "abs_error");
  r.wall_time_seconds = parse_number(f[9], "wall_time_seconds");
  return r;
}

std::vector<ErrorRecord> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw std::runtime_error("csv: " + path.string() + " does not start with the expected header");
  }
  std::vector<ErrorRecord> out;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(parse_csv_row(line));
  }
  return out;
}

CsvAppender::CsvAppender(const std::filesystem::path& path) : path_(path), out_(path) {
  if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out_ << kCsvHeader << '\n';
  out_.flush();
}

void CsvAppender::append(const ErrorRecord& record) {
  const std::string row = to_csv_row(record);
  std::lock_guard lock(mutex_);
  out_ << row << '\n';
  out_.flush();
}

void CsvAppender::append(const std::vector<ErrorRecord>& records) {
  std::string block;
  for (const auto& r : records) block += to_csv_row(r) + '\n';
  std::lock_guard lock(mutex_);
  out_ << block;
  out_.flush();
}

// ---------------------------------------------------------------------------
// Manifest

std::string code_version() { return "qcmd 1.0.0"; }

nlohmann::json to_json(const RunConfig& cfg) {
  return {{"h", cfg.h},
          {"dt", cfg.dt},
          {"T", cfg.T},
          {"potential", cfg.potential_name},
          {"alpha", cfg.alpha},
          {"x0", cfg.x0},
          {"k0", cfg.k0},
          {"y0", cfg.y0},
          {"v0", cfg.v0},
          {"points_per_h", cfg.grid_points_per_h},
          {"observables", cfg.observables},
          {"reference_dt", cfg.reference_dt},
          {"max_grid_points", cfg.max_grid_points}};
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig cfg;
  cfg.h = j.at("h").get<double>();
  cfg.dt = j.at("dt").get<double>();
  cfg.T = j.at("T").get<double>();
  cfg.potential_name = j.at("potential").get<std::string>();
  cfg.alpha = j.at("alpha").get<double>();
  cfg.x0 = j.at("x0").get<double>();
  cfg.k0 = j.at("k0").get<double>();
  cfg.y0 = j.at("y0").get<double>();
  cfg.v0 = j.at("v0").get<double>();
  cfg.grid_points_per_h = j.at("points_per_h").get<int>();
  cfg.observables = j.at("observables").get<std::vector<std::string>>();
  cfg.reference_dt = j.at("reference_dt").get<double>();
  cfg.max_grid_points = j.at("max_grid_points").get<std::size_t>();
  return cfg;
}

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

nlohmann::json make_manifest(const std::string& command, const RunConfig& cfg, const nlohmann::json& extra) {
  nlohmann::json m = {{"command", command},
                      {"config", to_json(cfg)},
                      {"code_version", code_version()},
                      {"timestamp", utc_timestamp()}};
  for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
  return m;
}

std::filesystem::path manifest_path_for(const std::filesystem::path& data_path) {
  auto p = data_path;
  p.replace_extension(".manifest.json");
  return p;
}

void write_manifest(const std::filesystem::path& path, const nlohmann::json& manifest) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << manifest.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Sweeps

std::vector<ErrorRecord> measure_run(const RunConfig& cfg, const QcmdState& reference, SweepMode mode,
                                     const std::string& run_id) {
  const auto start = std::chrono::steady_clock::now();
  const QcmdState state = run_to_final(cfg, cfg.dt);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const Grid& grid = state.psi.grid();
  if (reference.psi.grid() != grid) throw std::invalid_argument("measure_run: reference grid differs");
  std::vector<ErrorRecord> out;
  auto add = [&](const std::string& metric, double ref, double num, double err) {
    out.push_back({run_id, cfg.h, cfg.dt, cfg.T, grid.n_points(), metric, ref, num, err, wall});
  };

  if (mode != SweepMode::observables) {
    double diff = 0.0, ref_norm = 0.0, num_norm = 0.0;
    for (std::size_t j = 0; j < state.psi.size(); ++j) {
      diff += std::norm(state.psi[j] - reference.psi[j]);
      ref_norm += std::norm(reference.psi[j]);
      num_norm += std::norm(state.psi[j]);
    }
    const double scale = std::sqrt(grid.spacing());
    add("wavefunction_l2", scale * std::sqrt(ref_norm), scale * std::sqrt(num_norm), scale * std::sqrt(diff));
    add("nuclear_y", reference.nuclear.y, state.nuclear.y, std::abs(state.nuclear.y - reference.nuclear.y));
    add("nuclear_v", reference.nuclear.v, state.nuclear.v, std::abs(state.nuclear.v - reference.nuclear.v));
  }
  if (mode != SweepMode::wavefunction) {
    for (const auto& name : cfg.observables) {
      const Observable obs = builtin_observable(name);
      const double ref = expectation(obs, reference.psi);
      const double num = expectation(obs, state.psi);
      add("observable:" + name, ref, num, std::abs(num - ref));
    }
  }
  return out;
}

namespace {

std::string run_id_for(const char* sweep, double h, double dt) {
  std::ostringstream out;
  out.precision(10);
  out << sweep << "-h" << h << "-dt" << dt;
  return out.str();
}

}  // namespace

std::map<std::string, SlopeFit> fit_records(const std::vector<ErrorRecord>& records, bool by_h, double floor) {
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> series;
  for (const auto& r : records) {
    auto& s = series[r.metric];
    s.first.push_back(by_h ? r.h : r.dt);
    s.second.push_back(r.abs_error);
  }
  std::map<std::string, SlopeFit> fits;
  for (const auto& [metric, s] : series) {
    try {
      fits[metric] = fit_loglog(s.first, s.second, floor);
    } catch (const std::invalid_argument&) {
      // Not enough resolvable points for this metric.
    }
  }
  return fits;
}

SweepResult sweep_dt(const RunConfig& cfg, const std::vector<double>& dt_list, const SweepOptions& options) {
  for (double dt : dt_list) {
    try {
      commensurate_steps(cfg.T, dt);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("sweep_dt: dt=" + format_number(dt) + ": " + e.what());
    }
  }
  ReferenceCache local;
  ReferenceCache& cache = options.cache != nullptr ? *options.cache : local;
  const QcmdState& reference = cache.get(cfg);

  std::vector<std::vector<ErrorRecord>> cells(dt_list.size());
  parallel_for(dt_list.size(), options.workers, [&](std::size_t i) {
    RunConfig c = cfg;
    c.dt = dt_list[i];
    cells[i] = measure_run(c, reference, SweepMode::all, run_id_for("dt", c.h, c.dt));
    if (options.sink != nullptr) options.sink->append(cells[i]);
  });

  SweepResult result;
  for (auto& cell : cells) result.records.insert(result.records.end(), cell.begin(), cell.end());
  result.fits = fit_records(result.records, false);
  return result;
}

SweepResult sweep_h(const RunConfig& cfg, const std::vector<double>& h_list, SweepMode mode,
                    const SweepOptions& options) {
  commensurate_steps(cfg.T, cfg.dt);
  ReferenceCache local;
  ReferenceCache& cache = options.cache != nullptr ? *options.cache : local;

  std::vector<std::vector<ErrorRecord>> cells(h_list.size());
  parallel_for(h_list.size(), options.workers, [&](std::size_t i) {
    RunConfig c = cfg;
    c.h = h_list[i];
    const QcmdState& reference = cache.get(c);
    cells[i] = measure_run(c, reference, mode, run_id_for("h", c.h, c.dt));
    if (options.sink != nullptr) options.sink->append(cells[i]);
  });

  SweepResult result;
  for (auto& cell : cells) result.records.insert(result.records.end(), cell.begin(), cell.end());
  result.fits = fit_records(result.records, true);
  return result;
}

std::vector<ErrorRecord> sweep_lattice(const RunConfig& cfg, const std::vector<double>& h_list,
                                       const std::vector<double>& dt_list, const SweepOptions& options) {
  ReferenceCache local;
  SweepOptions opts = options;
  if (opts.cache == nullptr) opts.cache = &local;
  std::vector<ErrorRecord> out;
  for (double dt : dt_list) {
    RunConfig c = cfg;
    c.dt = dt;
    auto part = sweep_h(c, h_list, SweepMode::all, opts).records;
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Envelope

double symbol_sup_norm(const Observable& observable, const Grid& grid) {
  if (observable.kind != ObservableKind::position_multiplier) {
    throw std::invalid_argument("symbol_sup_norm: '" + observable.name + "' is not a position multiplier");
  }
  double sup = 0.0;
  for (std::size_t j = 0; j < grid.n_points(); ++j) {
    sup = std::max(sup, std::abs(observable.position_factor(grid.node(j))));
  }
  return sup;
}

EnvelopeTable min_error_envelope(const std::vector<ErrorRecord>& records,
                                 const std::map<std::string, double>& sup_norms) {
  const std::string prefix = "observable:";
  std::map<std::pair<double, double>, double> wavefunction;
  for (const auto& r : records) {
    if (r.metric == "wavefunction_l2") wavefunction[{r.h, r.dt}] = r.abs_error;
  }

  EnvelopeTable table;
  // observable -> dt -> (worst envelope, h at worst)
  std::map<std::string, std::map<double, std::pair<double, double>>> worst;
  for (const auto& r : records) {
    if (r.metric.rfind(prefix, 0) != 0) continue;
    const std::string name = r.metric.substr(prefix.size());
    const auto sup = sup_norms.find(name);
    if (sup == sup_norms.end()) continue;
    const auto wf = wavefunction.find({r.h, r.dt});
    if (wf == wavefunction.end()) continue;
    EnvelopeRow row;
    row.observable = name;
    row.h = r.h;
    row.dt = r.dt;
    row.observable_error = r.abs_error;
    row.wavefunction_proxy = 2.0 * sup->second * wf->second;
    row.envelope = std::min(row.observable_error, row.wavefunction_proxy);
    table.rows.push_back(row);
    auto [it, inserted] = worst[name].try_emplace(r.dt, row.envelope, r.h);
    if (!inserted && row.envelope > it->second.first) it->second = {row.envelope, r.h};
  }

  for (const auto& [name, by_dt] : worst) {
    EnvelopeWorstCase wc;
    wc.observable = name;
    for (const auto& [dt, value] : by_dt) {
      wc.dt_values.push_back(dt);
      wc.worst.push_back(value.first);
      wc.worst_h.push_back(value.second);
    }
    try {
      wc.fit = fit_loglog(wc.dt_values, wc.worst, kSweepFitFloor);
      wc.fitted = true;
    } catch (const std::invalid_argument&) {
      wc.fitted = false;
    }
    table.worst_cases.push_back(std::move(wc));
  }
  return table;
}

}  // namespace qcmd
