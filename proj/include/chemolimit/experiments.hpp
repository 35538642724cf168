#pragma once

// Singular-limit sweeps: solve the limit system once, solve the relaxation
// system for a list of small parameters from the same initial density, measure
// space-time error norms, and fit log-log rates.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "chemolimit/diagnostics.hpp"
#include "chemolimit/dynamics.hpp"
#include "chemolimit/grid.hpp"

namespace chemo {

struct GridSpec {
  GridKind kind = GridKind::Interval;
  double length_x = 1.0;
  double length_y = 1.0;
  int nodes_x = 256;
  int nodes_y = 256;
  int dimension = 1;  ///< ball dimension for RadialBall

  GridPtr build() const;
};

/// Named initial-data presets, sampled on any grid.
struct Profile {
  enum class Kind { Zero, Constant, Gaussian, TwoBump };
  Kind kind = Kind::Zero;
  double value = 0.0;  ///< Constant
  double center_x = 0.5;
  double center_y = 0.5;
  double center2_x = 0.25;  ///< second bump of TwoBump
  double center2_y = 0.25;
  double width = 0.1;  ///< standard deviation of each bump
  double mass = 0.5;   ///< Gaussian/TwoBump: integral on the sampling grid

  static Profile zero() { return {}; }
  static Profile constant(double v);
  static Profile gaussian(double mass, double center, double width);

  /// Gaussian and TwoBump are rescaled so integrate() returns `mass` exactly.
  Field sample(const GridPtr& grid) const;
};

enum class DataFamily {
  WellPrepared,  ///< c0, w0 on the limit's critical manifold
  IllPrepared,   ///< c0, w0 given by the explicit profiles
  /// First-order slow-manifold data: the fast residuals at t = 0 equal eps
  /// times the limit's time derivative, so the distance is O(eps).
  EpsPrepared,
};

std::string to_string(DataFamily f);
DataFamily data_family_from_string(const std::string& s);

struct PesSweep {
  double tau = 1.0;
  std::vector<double> eps_list;
};
struct IdsSweep {
  std::vector<std::pair<double, double>> kappa_list;  ///< (eps, tau)
};

/// Which points may enter a rate fit.
enum class MeshGuard {
  /// Rerun each point at (h/2, dt/2); drop a point when its error is below
  /// guard_factor times the change under that refinement.
  Sensitivity,
  /// Drop points below guard_factor times discretization_floor().
  Floor,
  None,
};

std::string to_string(MeshGuard g);
MeshGuard mesh_guard_from_string(const std::string& s);

struct SweepConfig {
  std::variant<PesSweep, IdsSweep> sweep;
  GridSpec grid;
  double t_end = 0.5;
  double dt = 1e-3;
  DataFamily family = DataFamily::WellPrepared;
  Profile n0 = Profile::gaussian(0.5, 0.5, 0.1);
  Profile c0;  ///< IllPrepared only
  Profile w0;
  MeshGuard guard = MeshGuard::Sensitivity;
  double guard_factor = 3.0;
  unsigned threads = 1;

  bool is_pes() const { return std::holds_alternative<PesSweep>(sweep); }
  std::size_t point_count() const;
  /// Throws InvalidArgument for malformed values and FitRejected when fewer
  /// than four sweep points are configured.
  void validate() const;
};

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_ = 0.0;
};

/// Least squares on (log x, log e). Needs at least four points.
FitResult fit_rate(const std::vector<double>& xs, const std::vector<double>& es);

struct MetricSeries {
  std::string name;
  std::vector<double> values;  ///< NaN where the trajectory failed
  std::vector<bool> in_fit;
  bool fitted = false;  ///< false when it is a record, not a rate
  std::optional<FitResult> fit;
  std::string fit_error;  ///< set when a fitted metric was rejected
  std::size_t fit_points() const;
};

inline constexpr const char* kMetricNames[] = {
    "err_n_LinfL2", "err_n_L2H1",        "err_c_LinfH1", "err_c_L2H1",
    "err_w_LinfL2", "err_w_L2H1",        "res_manifold_L2H1", "res_w_L2L2",
};
inline constexpr std::size_t kMetricCount = 8;

struct RateReport {
  std::string abscissa_name;  ///< "eps" or "kappa"
  std::vector<double> abscissae;
  std::vector<MetricSeries> metrics;  ///< kMetricNames order, then dist/layer records
  std::vector<std::string> failures;  ///< empty string where the point succeeded
  std::vector<double> runtimes;       ///< seconds per point; not written to CSV
  double mass = 0.0;
  bool mass_hypothesis_violated = false;
  std::string mass_note;
  std::optional<double> floor;  ///< set when the Floor guard ran

  const MetricSeries& metric(const std::string& name) const;
  bool all_fits_ok() const;
  /// Largest-abscissa w error is not decaying: err_w_LinfL2 at the smallest
  /// abscissa is at least half of its value at the largest.
  bool w_plateau() const;
};

/// Regime of the reference (limit) solve and of one sweep point.
Regime reference_regime(const SweepConfig& cfg);
Regime point_regime(const SweepConfig& cfg, std::size_t index);
double abscissa(const SweepConfig& cfg, std::size_t index);

/// Initial state of the limit solve: n0 and the signals the limit induces.
State reference_initial_state(const SweepConfig& cfg, const GridPtr& grid);
/// Initial state of sweep point `index` for the configured data family.
State point_initial_state(const SweepConfig& cfg, const GridPtr& grid, std::size_t index);

RateReport run_pes_sweep(const SweepConfig& cfg);
RateReport run_ids_sweep(const SweepConfig& cfg);

/// Max over the coarse time levels of the L2 difference of n between the
/// limit solve at (h, dt) and at (h/2, dt/2), compared on the coarse nodes.
double discretization_floor(const SweepConfig& cfg);

/// Thresholds of the sub-critical mass hypotheses: 4 pi for planar IDS runs,
/// 64 tau pi^2 on the four-dimensional ball.
std::optional<std::string> mass_hypothesis_violation(const Grid& grid, double mass, const Regime& limit);

// CSV ----------------------------------------------------------------------

struct CsvRow {
  double abscissa = 0.0;
  std::string metric;
  double value = 0.0;
  std::string slope_group;
};
struct CsvSlope {
  std::string metric;
  double slope = 0.0;
  double stderr_ = 0.0;
  std::size_t npoints = 0;
};
struct CsvReport {
  std::vector<CsvRow> rows;
  std::vector<CsvSlope> slopes;
};

inline constexpr const char* kCsvHeader = "abscissa,metric,value,slope_group";
inline constexpr const char* kCsvSlopeHeader = "metric,slope,stderr,npoints";

/// %.17g formatting, independent of locale.
std::string format_double(double v);

void write_csv(const RateReport& report, std::ostream& os);
void emit_csv(const RateReport& report, const std::string& path);
CsvReport parse_csv(std::istream& is);
CsvReport parse_csv_file(const std::string& path);

}  // namespace chemo
