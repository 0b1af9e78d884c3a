#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "qcmd/fit.hpp"
#include "qcmd/observables.hpp"
#include "qcmd/run_config.hpp"

namespace qcmd {

/// One measured error: a metric of a run at (h, dt) against its reference.
///
/// metric is one of wavefunction_l2, nuclear_y, nuclear_v or
/// observable:<name>. For wavefunction_l2 the two values are the scaled
/// norms sqrt(dx) ||psi|| of the reference and the numerical solution.
struct ErrorRecord {
  std::string run_id;
  double h = 0.0;
  double dt = 0.0;
  double T = 0.0;
  std::size_t n_points = 0;
  std::string metric;
  double reference_value = 0.0;
  double numerical_value = 0.0;
  double abs_error = 0.0;
  double wall_time_seconds = 0.0;

  friend bool operator==(const ErrorRecord&, const ErrorRecord&) = default;
};

inline constexpr const char* kCsvHeader =
    "run_id,h,dt,T,n_points,metric,reference_value,numerical_value,abs_error,wall_time_seconds";

std::string to_csv_row(const ErrorRecord& record);
/// Inverse of to_csv_row; throws std::runtime_error on malformed rows.
ErrorRecord parse_csv_row(const std::string& line);
/// Reads a whole CSV file, checking the header.
std::vector<ErrorRecord> read_csv(const std::filesystem::path& path);

/// Writes the header on construction, then serializes appends from any thread.
class CsvAppender {
 public:
  explicit CsvAppender(const std::filesystem::path& path);

  void append(const ErrorRecord& record);
  void append(const std::vector<ErrorRecord>& records);
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  std::mutex mutex_;
  std::ofstream out_;
};

/// "qcmd <version>".
std::string code_version();

/// Full RunConfig as JSON.
nlohmann::json to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j);

/// {"command", "config", "code_version", "timestamp", ...extra}.
nlohmann::json make_manifest(const std::string& command, const RunConfig& cfg,
                             const nlohmann::json& extra = nlohmann::json::object());
/// run.csv -> run.manifest.json in the same directory.
std::filesystem::path manifest_path_for(const std::filesystem::path& data_path);
void write_manifest(const std::filesystem::path& path, const nlohmann::json& manifest);

// ---------------------------------------------------------------------------
// Sweeps

/// Errors below 10 times this are treated as reference noise and not fitted.
inline constexpr double kReferenceFloor = 1e-13;
inline constexpr double kSweepFitFloor = 10.0 * kReferenceFloor;

enum class SweepMode { observables, wavefunction, all };

struct SweepOptions {
  std::size_t workers = 1;
  ReferenceCache* cache = nullptr;  ///< shared reference runs; a private cache is used when null
  CsvAppender* sink = nullptr;      ///< records are also appended here when set
};

struct SweepResult {
  std::vector<ErrorRecord> records;
  /// Log-log fit of abs_error against the swept variable, per metric. Metrics
  /// with fewer than two points above kSweepFitFloor are absent.
  std::map<std::string, SlopeFit> fits;
};

/// Errors of one run of cfg (at cfg.h, cfg.dt) against the reference run.
std::vector<ErrorRecord> measure_run(const RunConfig& cfg, const QcmdState& reference, SweepMode mode,
                                     const std::string& run_id);

/// Fixed h, one Strang run per dt. Throws std::invalid_argument naming any dt
/// that does not divide T.
SweepResult sweep_dt(const RunConfig& cfg, const std::vector<double>& dt_list, const SweepOptions& options = {});

/// Fixed dt, one run per h on its own grid.
SweepResult sweep_h(const RunConfig& cfg, const std::vector<double>& h_list, SweepMode mode,
                    const SweepOptions& options = {});

/// sweep_h in mode all for every dt in dt_list (the (h, dt) lattice).
std::vector<ErrorRecord> sweep_lattice(const RunConfig& cfg, const std::vector<double>& h_list,
                                       const std::vector<double>& dt_list, const SweepOptions& options = {});

/// Fits abs_error against h (by_h) or dt for every metric in `records`.
std::map<std::string, SlopeFit> fit_records(const std::vector<ErrorRecord>& records, bool by_h,
                                            double floor = kSweepFitFloor);

// ---------------------------------------------------------------------------
// Envelope

/// max |f(x_j)| over the grid nodes; position multipliers only.
double symbol_sup_norm(const Observable& observable, const Grid& grid);

struct EnvelopeRow {
  std::string observable;
  double h = 0.0;
  double dt = 0.0;
  double observable_error = 0.0;
  double wavefunction_proxy = 0.0;  ///< 2 sup|a| times the wavefunction_l2 error
  double envelope = 0.0;            ///< min of the two
};

struct EnvelopeWorstCase {
  std::string observable;
  std::vector<double> dt_values;
  std::vector<double> worst;  ///< max over h of the envelope at each dt
  std::vector<double> worst_h;
  SlopeFit fit;
  bool fitted = false;
};

struct EnvelopeTable {
  std::vector<EnvelopeRow> rows;
  std::vector<EnvelopeWorstCase> worst_cases;
};

/// Pairs observable:<name> and wavefunction_l2 records on equal (h, dt).
/// Observables without an entry in sup_norms are skipped.
EnvelopeTable min_error_envelope(const std::vector<ErrorRecord>& records,
                                 const std::map<std::string, double>& sup_norms);

}  // namespace qcmd
