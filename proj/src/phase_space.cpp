#include "qcmd/phase_space.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "qcmd/fft.hpp"
#include "qcmd/parallel.hpp"

namespace qcmd {

std::string to_string(FieldKind kind) { return kind == FieldKind::wigner ? "wigner" : "husimi"; }

FieldKind field_kind_from_string(const std::string& text) {
  if (text == "wigner") return FieldKind::wigner;
  if (text == "husimi") return FieldKind::husimi;
  throw std::invalid_argument("unknown phase-space field kind '" + text + "'");
}

double PhaseSpaceField::integral() const {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum * dx * dxi;
}

double PhaseSpaceField::l2_norm() const {
  double sum = 0.0;
  for (double v : values) sum += v * v;
  return std::sqrt(sum * dx * dxi);
}

Complex CoherentState::operator()(double y) const {
  const double d = y - center_x;
  const double amplitude = std::pow(std::numbers::pi * h, -0.25) * std::exp(-d * d / (2.0 * h));
  return std::polar(amplitude, center_xi * d / h);
}

ComplexVector CoherentState::sample(const Grid& grid) const {
  ComplexVector out(grid.n_points());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = (*this)(grid.node(j));
  return out;
}

// ---------------------------------------------------------------------------
// Wigner

namespace {

struct WignerLayout {
  std::size_t n = 0;
  double dx = 0.0;
  double dxi = 0.0;
  double scale = 0.0;  // n dy / (2 pi), undoing the 1/n of the inverse FFT
};

WignerLayout check_wigner_input(const WaveFunction& psi) {
  const Grid& grid = psi.grid();
  const std::size_t n = grid.n_points();
  if (static_cast<double>(n) < kAliasingPointsPerH / psi.h()) {
    throw std::invalid_argument("wigner_transform: grid of " + std::to_string(n) +
                                " points is too coarse for h=" + std::to_string(psi.h()) +
                                " (need n >= 32/h)");
  }
  const double edge = std::max(std::norm(psi[0]), std::norm(psi[n - 1]));
  if (edge > kBoundaryDensityTolerance) {
    std::ostringstream msg;
    msg << "wigner_transform: boundary density " << edge << " exceeds " << kBoundaryDensityTolerance
        << "; the packet is not contained in the domain";
    throw std::domain_error(msg.str());
  }
  WignerLayout layout;
  layout.n = n;
  layout.dx = grid.spacing();
  layout.dxi = std::numbers::pi * psi.h() / (static_cast<double>(n) * layout.dx);
  layout.scale = static_cast<double>(n) * layout.dx / (std::numbers::pi * psi.h());
  return layout;
}

// Fills `row` with w(x_j, xi_k) in FFT order (index k mod n).
void wigner_row(std::span<const Complex> psi, std::size_t j, const FourierTransform& fft,
                ComplexVector& row) {
  const std::size_t n = psi.size();
  std::fill(row.begin(), row.end(), Complex{});
  const std::size_t reach = std::min(j, n - 1 - j);
  row[0] = psi[j] * std::conj(psi[j]);
  for (std::size_t m = 1; m <= reach; ++m) {
    const Complex c = psi[j - m] * std::conj(psi[j + m]);
    row[m] = c;
    row[n - m] = std::conj(c);
  }
  // sum_m c_m e^{+2 pi i km/n}; inverse() divides by n, which the caller's
  // scale absorbs. The correlation is Hermitian in m, so the result is real.
  fft.inverse(row);
}

double xi_of_fft_index(std::size_t idx, const WignerLayout& layout) {
  const auto n = static_cast<std::ptrdiff_t>(layout.n);
  auto k = static_cast<std::ptrdiff_t>(idx);
  if (k >= n / 2) k -= n;
  return static_cast<double>(k) * layout.dxi;
}

}  // namespace

PhaseSpaceField wigner_transform(const WaveFunction& psi, const WignerOptions& options) {
  const WignerLayout layout = check_wigner_input(psi);
  if (options.row_stride == 0) throw std::invalid_argument("wigner_transform: row_stride must be >= 1");
  const Grid& grid = psi.grid();
  const std::size_t n = layout.n;

  std::vector<std::size_t> rows;
  for (std::size_t j = 0; j < n; ++j) {
    const double x = grid.node(j);
    if (options.x_min && x < *options.x_min) continue;
    if (options.x_max && x > *options.x_max) continue;
    if (!rows.empty() && (j - rows.front()) % options.row_stride != 0) continue;
    rows.push_back(j);
  }
  // Columns in ascending xi order: k = -n/2 .. n/2-1.
  std::vector<std::size_t> columns;
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t idx = (s + n / 2) % n;
    const double xi = xi_of_fft_index(idx, layout);
    if (options.xi_min && xi < *options.xi_min) continue;
    if (options.xi_max && xi > *options.xi_max) continue;
    columns.push_back(idx);
  }
  if (rows.empty() || columns.empty()) {
    throw std::invalid_argument("wigner_transform: requested window contains no grid nodes");
  }

  PhaseSpaceField field;
  field.kind = FieldKind::wigner;
  field.h = psi.h();
  field.dx = layout.dx * static_cast<double>(options.row_stride);
  field.dxi = layout.dxi;
  for (std::size_t j : rows) field.x_nodes.push_back(grid.node(j));
  for (std::size_t idx : columns) field.xi_nodes.push_back(xi_of_fft_index(idx, layout));
  field.values.assign(rows.size() * columns.size(), 0.0);

  const FourierTransform fft(n);
  const auto values = psi.values();
  parallel_for(rows.size(), options.workers, [&](std::size_t r) {
    ComplexVector row(n);
    wigner_row(values, rows[r], fft, row);
    double* out = field.values.data() + r * columns.size();
    for (std::size_t c = 0; c < columns.size(); ++c) out[c] = layout.scale * row[columns[c]].real();
  });
  return field;
}

double wigner_integral(const WaveFunction& psi, const Symbol& a, std::size_t workers) {
  const WignerLayout layout = check_wigner_input(psi);
  const Grid& grid = psi.grid();
  const std::size_t n = layout.n;
  const FourierTransform fft(n);
  RealVector xi(n);
  for (std::size_t idx = 0; idx < n; ++idx) xi[idx] = xi_of_fft_index(idx, layout);

  RealVector row_sums(n, 0.0);
  const auto values = psi.values();
  parallel_for(n, workers, [&](std::size_t j) {
    ComplexVector row(n);
    wigner_row(values, j, fft, row);
    double sum = 0.0;
    const double x = grid.node(j);
    for (std::size_t idx = 0; idx < n; ++idx) sum += a(x, xi[idx]) * row[idx].real();
    row_sums[j] = sum;
  });
  double total = 0.0;
  for (double s : row_sums) total += s;
  return total * layout.scale * layout.dx * layout.dxi;
}

// ---------------------------------------------------------------------------
// Husimi

RealVector linspace(double lo, double hi, std::size_t count) {
  if (count == 0) return {};
  if (count == 1) return {0.5 * (lo + hi)};
  RealVector out(count);
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo + static_cast<double>(i) * step;
  return out;
}

PhaseSpaceBox default_husimi_box(const WaveFunction& psi, std::size_t nodes, double half_width_sd) {
  if (nodes < 2) throw std::invalid_argument("default_husimi_box: need at least 2 nodes per axis");
  const Grid& grid = psi.grid();
  double weight = 0.0, mean_x = 0.0, second_x = 0.0;
  for (std::size_t j = 0; j < psi.size(); ++j) {
    const double rho = std::norm(psi[j]);
    const double x = grid.node(j);
    weight += rho;
    mean_x += x * rho;
    second_x += x * x * rho;
  }
  if (weight == 0.0) throw std::invalid_argument("default_husimi_box: zero wavefunction");
  mean_x /= weight;
  const double var_x = std::max(0.0, second_x / weight - mean_x * mean_x);

  ComplexVector coeffs(psi.values().begin(), psi.values().end());
  FourierTransform(coeffs.size()).forward(coeffs);
  const auto k = fourier_modes(grid);
  double p_weight = 0.0, mean_p = 0.0, second_p = 0.0;
  for (std::size_t m = 0; m < coeffs.size(); ++m) {
    const double rho = std::norm(coeffs[m]);
    const double p = psi.h() * k[m];
    p_weight += rho;
    mean_p += p * rho;
    second_p += p * p * rho;
  }
  mean_p /= p_weight;
  const double var_p = std::max(0.0, second_p / p_weight - mean_p * mean_p);

  const double half_x = half_width_sd * std::sqrt(var_x + 0.5 * psi.h());
  const double half_p = half_width_sd * std::sqrt(var_p + 0.5 * psi.h());
  return {linspace(mean_x - half_x, mean_x + half_x, nodes),
          linspace(mean_p - half_p, mean_p + half_p, nodes)};
}

namespace {

double uniform_spacing(const RealVector& nodes, const char* axis) {
  if (nodes.empty()) throw std::invalid_argument(std::string("husimi_function: empty ") + axis + " nodes");
  if (nodes.size() == 1) return 1.0;
  const double step = (nodes.back() - nodes.front()) / static_cast<double>(nodes.size() - 1);
  if (!(step > 0.0)) throw std::invalid_argument(std::string("husimi_function: ") + axis + " nodes must increase");
  return step;
}

constexpr double kCoherentCutoff = 10.0;  // in units of sqrt(h)
constexpr std::size_t kReanchorInterval = 256;

}  // namespace

PhaseSpaceField husimi_function(const WaveFunction& psi, const RealVector& x_nodes,
                                const RealVector& xi_nodes, std::size_t workers) {
  const double h = psi.h();
  if (h > 0.25) throw std::invalid_argument("husimi_function: requires h <= 0.25");
  const Grid& grid = psi.grid();
  const double dx = grid.spacing();
  const std::size_t n = grid.n_points();

  PhaseSpaceField field;
  field.kind = FieldKind::husimi;
  field.h = h;
  field.x_nodes = x_nodes;
  field.xi_nodes = xi_nodes;
  field.dx = uniform_spacing(x_nodes, "x");
  field.dxi = uniform_spacing(xi_nodes, "xi");
  field.values.assign(x_nodes.size() * xi_nodes.size(), 0.0);

  const double root_h = std::sqrt(h);
  const double margin = 5.0 * root_h;
  std::size_t near_boundary = 0;
  for (double x : x_nodes) {
    if (x - margin < grid.x_min() || x + margin > grid.x_max()) ++near_boundary;
  }
  if (near_boundary > 0) {
    field.warnings.push_back("husimi_function: " + std::to_string(near_boundary) +
                             " x nodes lie within 5 sqrt(h) of the domain boundary");
  }

  const double amplitude = std::pow(std::numbers::pi * h, -0.25);
  const double prefactor = 1.0 / (2.0 * std::numbers::pi * h);
  const auto values = psi.values();
  const std::size_t n_xi = xi_nodes.size();

  parallel_for(x_nodes.size(), workers, [&](std::size_t i) {
    const double x = x_nodes[i];
    const double lo = (x - kCoherentCutoff * root_h - grid.x_min()) / dx;
    const double hi = (x + kCoherentCutoff * root_h - grid.x_min()) / dx;
    const auto j0 = static_cast<std::size_t>(std::clamp(std::ceil(lo), 0.0, static_cast<double>(n)));
    const auto j1 = static_cast<std::size_t>(std::clamp(std::floor(hi) + 1.0, 0.0, static_cast<double>(n)));
    // Window of conj(envelope) * psi * dx; the oscillating factor is applied per xi.
    ComplexVector weighted;
    weighted.reserve(j1 > j0 ? j1 - j0 : 0);
    for (std::size_t j = j0; j < j1; ++j) {
      const double d = grid.node(j) - x;
      weighted.push_back(amplitude * std::exp(-d * d / (2.0 * h)) * dx * values[j]);
    }
    const double d0 = j0 < n ? grid.node(j0) - x : 0.0;
    for (std::size_t k = 0; k < n_xi; ++k) {
      const double xi = xi_nodes[k];
      const Complex ratio = std::polar(1.0, -xi * dx / h);
      Complex sum{};
      Complex phase{};
      for (std::size_t s = 0; s < weighted.size(); ++s) {
        if (s % kReanchorInterval == 0) {
          phase = std::polar(1.0, -xi * (d0 + static_cast<double>(s) * dx) / h);
        }
        sum += weighted[s] * phase;
        phase *= ratio;
      }
      field.values[i * n_xi + k] = prefactor * std::norm(sum);
    }
  });
  return field;
}

PhaseSpaceField husimi_function(const WaveFunction& psi, const PhaseSpaceBox& box, std::size_t workers) {
  return husimi_function(psi, box.x_nodes, box.xi_nodes, workers);
}

// ---------------------------------------------------------------------------
// Quadrature

double wigner_expectation(const Symbol& a, const PhaseSpaceField& field) {
  if (field.kind != FieldKind::wigner) {
    throw std::invalid_argument("wigner_expectation: field is not a Wigner field");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < field.n_x(); ++i) {
    for (std::size_t k = 0; k < field.n_xi(); ++k) {
      const double w = field.at(i, k);
      if (w != 0.0) sum += a(field.x_nodes[i], field.xi_nodes[k]) * w;
    }
  }
  return sum * field.dx * field.dxi;
}

double husimi_expectation(const Symbol& a, const Symbol& lap_a, const PhaseSpaceField& field, double h) {
  if (field.kind != FieldKind::husimi) {
    throw std::invalid_argument("husimi_expectation: field is not a Husimi field");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < field.n_x(); ++i) {
    for (std::size_t k = 0; k < field.n_xi(); ++k) {
      const double x = field.x_nodes[i];
      const double xi = field.xi_nodes[k];
      sum += (a(x, xi) - 0.25 * h * lap_a(x, xi)) * field.at(i, k);
    }
  }
  return sum * field.dx * field.dxi;
}

// ---------------------------------------------------------------------------
// Text format

namespace {

void write_vector(std::ostream& out, const char* key, const RealVector& v) {
  out << key;
  for (double x : v) out << ' ' << x;
  out << '\n';
}

std::string next_line(std::istream& in, std::size_t& line_no) {
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("phase-space field: unexpected end of input after line " +
                             std::to_string(line_no));
  }
  ++line_no;
  return line;
}

std::istringstream keyed_line(std::istream& in, const std::string& key, std::size_t& line_no) {
  const std::string line = next_line(in, line_no);
  std::istringstream fields(line);
  std::string got;
  fields >> got;
  if (got != key) {
    throw std::runtime_error("phase-space field: line " + std::to_string(line_no) + ": expected '" + key +
                             "', found '" + got + "'");
  }
  return fields;
}

template <typename T>
T read_scalar(std::istream& in, const std::string& key, std::size_t& line_no) {
  auto fields = keyed_line(in, key, line_no);
  T value{};
  if (!(fields >> value)) {
    throw std::runtime_error("phase-space field: line " + std::to_string(line_no) + ": bad value for " + key);
  }
  return value;
}

RealVector read_numbers(std::istringstream& fields, std::size_t count, const std::string& what,
                        std::size_t line_no) {
  RealVector out(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!(fields >> out[i])) {
      throw std::runtime_error("phase-space field: line " + std::to_string(line_no) + ": expected " +
                               std::to_string(count) + " values for " + what);
    }
  }
  std::string extra;
  if (fields >> extra) {
    throw std::runtime_error("phase-space field: line " + std::to_string(line_no) + ": too many values for " +
                             what);
  }
  return out;
}

}  // namespace

void write_field(std::ostream& out, const PhaseSpaceField& field) {
  if (field.values.size() != field.n_x() * field.n_xi()) {
    throw std::invalid_argument("write_field: values size does not match node counts");
  }
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << kFieldFormatHeader << '\n';
  out << "kind " << to_string(field.kind) << '\n';
  out << "h " << field.h << '\n';
  out << "n_x " << field.n_x() << '\n';
  out << "n_xi " << field.n_xi() << '\n';
  out << "dx " << field.dx << '\n';
  out << "dxi " << field.dxi << '\n';
  write_vector(out, "x_nodes", field.x_nodes);
  write_vector(out, "xi_nodes", field.xi_nodes);
  out << "values\n";
  for (std::size_t i = 0; i < field.n_x(); ++i) {
    for (std::size_t k = 0; k < field.n_xi(); ++k) {
      if (k > 0) out << ' ';
      out << field.at(i, k);
    }
    out << '\n';
  }
  out.precision(old_precision);
}

PhaseSpaceField read_field(std::istream& in) {
  std::size_t line_no = 0;
  if (next_line(in, line_no) != kFieldFormatHeader) {
    throw std::runtime_error("phase-space field: missing header '" + std::string(kFieldFormatHeader) + "'");
  }
  PhaseSpaceField field;
  field.kind = field_kind_from_string(read_scalar<std::string>(in, "kind", line_no));
  field.h = read_scalar<double>(in, "h", line_no);
  const auto n_x = read_scalar<std::size_t>(in, "n_x", line_no);
  const auto n_xi = read_scalar<std::size_t>(in, "n_xi", line_no);
  field.dx = read_scalar<double>(in, "dx", line_no);
  field.dxi = read_scalar<double>(in, "dxi", line_no);
  {
    auto fields = keyed_line(in, "x_nodes", line_no);
    field.x_nodes = read_numbers(fields, n_x, "x_nodes", line_no);
  }
  {
    auto fields = keyed_line(in, "xi_nodes", line_no);
    field.xi_nodes = read_numbers(fields, n_xi, "xi_nodes", line_no);
  }
  keyed_line(in, "values", line_no);
  field.values.reserve(n_x * n_xi);
  for (std::size_t i = 0; i < n_x; ++i) {
    std::istringstream fields(next_line(in, line_no));
    const RealVector row = read_numbers(fields, n_xi, "row " + std::to_string(i), line_no);
    field.values.insert(field.values.end(), row.begin(), row.end());
  }
  return field;
}

void save_field(const std::filesystem::path& path, const PhaseSpaceField& field) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_field(out, field);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

PhaseSpaceField load_field(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_field(in);
}

}  // namespace qcmd
