#pragma once

// Experiment orchestration: configuration files, h-sweeps over ansatz
// quotients and eigenvalues, exponent fitting, and report emission.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kslab/operators.hpp"
#include "kslab/solver.hpp"
#include "kslab/surface.hpp"
#include "kslab/types.hpp"

namespace kslab {

// What a sweep measures at each thickness.  Ansatz evaluates the Korn
// functionals on the constructed oscillating trial field; Eig computes the
// discrete Korn constant; Both runs the two back to back; Kirchhoff evaluates
// the plate-bending quotient on the flat theta-arc of the surface.
enum class SweepMode { Ansatz, Eig, Both, Kirchhoff };

enum class ReportFormat { Csv, Svg, Both };

// Closed-form profile expressions for a surface built directly from its
// metric data: B(z) and the p-periodic a(theta), b(theta), c(theta).
struct ProfileSpec {
  std::string B = "z";
  std::string a = "0";
  std::string b = "1";
  std::string c = "1";
  Real p = 2 * kPi;
};

// Parsed experiment description.  Exactly one of `preset`, `profiles`,
// `curve_file` selects the surface.
struct ExperimentConfig {
  // [surface]
  std::string preset;  // e.g. "cylinder-circular radius=1 length=1"
  std::optional<ProfileSpec> profiles;
  std::string curve_file;  // curve-sample file; planar -> cylinder, spherical -> cone
  Real z_min = 0.0, z_max = 1.0;  // z-range for profile/curve surfaces

  // [experiment]
  SweepMode mode = SweepMode::Eig;
  BcTag bc = BcTag::V2;
  GradientKind kind = GradientKind::Full;
  std::vector<Real> h_values;  // strictly decreasing, all in (0, 1)
  std::uint64_t seed = 1234;
  // Optional theta-window: switches the ansatz construction to the windowed
  // profile-ratio route for surfaces whose metric ratio does not separate.
  std::optional<Interval> theta_window;
  int n_threads = 1;  // rows for distinct h may run in parallel

  // [eig]
  Real tol = 1e-8;
  int maxit = 500;
  ResolutionPolicy policy{};  // n_theta = 0 selects the thickness-adapted default

  // [output]
  std::string out_dir = ".";
  std::string stem = "sweep";
  ReportFormat format = ReportFormat::Csv;
};

// One measurement.  `mode` is never Both here: a both-sweep emits one ansatz
// row and one eig row per thickness.
struct SweepRow {
  Real h = 0.0;
  int n = 1;  // oscillation index floor(h^(-1/4))
  SweepMode mode = SweepMode::Eig;
  BcTag bc = BcTag::V2;
  GradientKind kind = GradientKind::Full;
  Real value = 0.0;  // quotient (ansatz/kirchhoff) or smallest eigenvalue (eig)
  int iterations = 0;   // 0 for non-iterative rows
  Real residual = 0.0;  // eigensolver residual; 0 for non-iterative rows
  Real wall_ms = 0.0;   // measured per row; excluded from determinism
};

// Ordinary least squares of log(value) against log(h) (natural logarithms;
// the slope is independent of the base, the intercept is reported in the
// natural-log convention).
struct FitResult {
  Real slope = 0.0;
  Real intercept = 0.0;
  Real r_squared = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // sorted by (mode, h descending)
  // Fit of the eig rows when the sweep contains any, otherwise of the single
  // remaining series; absent when that series has fewer than 3 rows.
  std::optional<FitResult> fit;
  std::uint64_t seed = 1234;
  std::string out_dir = ".";
  std::string stem = "sweep";
};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

// Parse the flat key-value format with section headers [surface],
// [experiment], [eig], [output].  `#` and `;` start comments; keys are
// `name = value`; list values are whitespace- or comma-separated.  Unknown
// sections or keys, malformed numbers, and syntax errors raise ParseError
// naming source and line; an h/n conflict or a bad n-list raises ConfigError.
// Cross-field invariants are checked by validate_config, not here, so a
// surface-only config (no thickness list) parses fine for geometry checks.
ExperimentConfig parse_config(std::istream& in, const std::string& source_name);
ExperimentConfig load_config(const std::string& path);  // IoFailure if unreadable

// Enforce the sweep invariants: exactly one surface source, a nonempty
// strictly decreasing h list inside (0,1), sane window/thread/eig settings.
// ConfigError otherwise.  Called by run_sweep.
void validate_config(const ExperimentConfig& cfg);

// Build the surface the config describes.  Errors propagate from the surface
// module (ConfigError if no source or an unknown preset is named).
ZeroGaussSurface config_surface(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Sweeps, fits, reports
// ---------------------------------------------------------------------------

// One row per thickness per single mode, deterministic for a fixed config and
// seed (wall_ms aside).  Rows for distinct h execute in parallel when
// cfg.n_threads > 1; the output order is sorted by (mode, h descending)
// regardless of completion order.  Module errors are rethrown with the
// failing thickness appended to the message.
SweepResult run_sweep(const ExperimentConfig& cfg);

// Least squares on (log h, log value).  Errors: InsufficientData for fewer
// than 3 rows, NonPositiveValue if any value is not strictly positive.
FitResult fit_exponent(const std::vector<SweepRow>& rows);

// Write <out_dir>/<stem>.csv and/or .svg; returns the paths written.
// CSV layout: one comment header naming the column order
// h,n,mode,bc,kind,value,iters,residual,wall_ms, one data line per row with
// 17-significant-digit numeric formatting, and the footer
// `# slope=<v> r2=<v> seed=<v>` (slope/r2 are nan when no fit was possible).
// The SVG is a log-log scatter of the rows with the fitted line.
// Errors: IoFailure on unwritable paths, InvalidArgument on an empty result.
std::vector<std::string> emit_report(const SweepResult& result, ReportFormat format);

// Re-parse an emitted CSV: rows in file order plus the footer fields.
// Errors: IoFailure, ParseError.
struct ParsedReport {
  std::vector<SweepRow> rows;
  Real slope = 0.0;
  Real r_squared = 0.0;
  std::uint64_t seed = 0;
};
ParsedReport parse_report(const std::string& path);

// String forms used by config files, CSV, and the CLI.
std::string to_string(SweepMode mode);
std::string to_string(BcTag bc);
std::string to_string(GradientKind kind);
SweepMode sweep_mode_from_string(const std::string& s);    // ParseError
BcTag bc_from_string(const std::string& s);                // ParseError
GradientKind kind_from_string(const std::string& s);       // ParseError

}  // namespace kslab
