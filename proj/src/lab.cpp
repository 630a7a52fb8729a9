#include "kslab/lab.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "kslab/ansatz.hpp"
#include "kslab/curve.hpp"
#include "kslab/expr.hpp"

namespace kslab {

namespace {

std::string fmt17(Real v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void parse_fail(const std::string& source, int line,
                             const std::string& what) {
  std::ostringstream os;
  os << source << ":" << line << ": " << what;
  fail(ErrorCode::ParseError, os.str());
}

Real to_real(const std::string& s, const std::string& source, int line) {
  std::size_t idx = 0;
  Real v = 0;
  try {
    v = std::stod(s, &idx);
  } catch (const std::exception&) {
    parse_fail(source, line, "expected a number, got '" + s + "'");
  }
  if (idx != s.size()) parse_fail(source, line, "trailing characters in number '" + s + "'");
  return v;
}

long long to_ll(const std::string& s, const std::string& source, int line) {
  std::size_t idx = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &idx);
  } catch (const std::exception&) {
    parse_fail(source, line, "expected an integer, got '" + s + "'");
  }
  if (idx != s.size())
    parse_fail(source, line, "trailing characters in integer '" + s + "'");
  return v;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::string cleaned = s;
  std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
  std::istringstream is(cleaned);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

// Message of a library Error without the repeated code prefix that the Error
// constructor would add on rethrow.
std::string strip_code_prefix(const char* what) {
  const std::string s(what);
  const auto pos = s.find(": ");
  return pos == std::string::npos ? s : s.substr(pos + 2);
}

}  // namespace

// ---------------------------------------------------------------------------
// String forms
// ---------------------------------------------------------------------------

std::string to_string(SweepMode mode) {
  switch (mode) {
    case SweepMode::Ansatz: return "ansatz";
    case SweepMode::Eig: return "eig";
    case SweepMode::Both: return "both";
    case SweepMode::Kirchhoff: return "kirchhoff";
  }
  return "?";
}

std::string to_string(BcTag bc) {
  switch (bc) {
    case BcTag::V1: return "V1";
    case BcTag::V2: return "V2";
    case BcTag::V3: return "V3";
    case BcTag::PeriodicOnly: return "periodic";
  }
  return "?";
}

std::string to_string(GradientKind kind) {
  return kind == GradientKind::Full ? "full" : "simplified";
}

SweepMode sweep_mode_from_string(const std::string& s) {
  if (s == "ansatz") return SweepMode::Ansatz;
  if (s == "eig") return SweepMode::Eig;
  if (s == "both") return SweepMode::Both;
  if (s == "kirchhoff") return SweepMode::Kirchhoff;
  fail(ErrorCode::ParseError, "unknown mode '" + s + "'");
}

BcTag bc_from_string(const std::string& s) {
  if (s == "V1") return BcTag::V1;
  if (s == "V2") return BcTag::V2;
  if (s == "V3") return BcTag::V3;
  if (s == "periodic") return BcTag::PeriodicOnly;
  fail(ErrorCode::ParseError, "unknown bc '" + s + "'");
}

GradientKind kind_from_string(const std::string& s) {
  if (s == "full") return GradientKind::Full;
  if (s == "simplified") return GradientKind::Simplified;
  fail(ErrorCode::ParseError, "unknown gradient kind '" + s + "'");
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

namespace {

void validate_surface_source(const ExperimentConfig& cfg) {
  const int sources = int(!cfg.preset.empty()) + int(cfg.profiles.has_value()) +
                      int(!cfg.curve_file.empty());
  if (sources != 1)
    fail(ErrorCode::ConfigError,
         "exactly one of preset, profile expressions, curve must describe the surface");
  if (!(cfg.z_min < cfg.z_max)) fail(ErrorCode::ConfigError, "need zmin < zmax");
}

}  // namespace

void validate_config(const ExperimentConfig& cfg) {
  validate_surface_source(cfg);
  if (cfg.h_values.empty())
    fail(ErrorCode::ConfigError, "the thickness list is empty");
  for (std::size_t i = 0; i < cfg.h_values.size(); ++i) {
    const Real h = cfg.h_values[i];
    if (!(h > 0) || !(h < 1))
      fail(ErrorCode::ConfigError, "thickness " + fmt17(h) + " outside (0, 1)");
    if (i > 0 && !(h < cfg.h_values[i - 1]))
      fail(ErrorCode::ConfigError, "thickness list must be strictly decreasing");
  }
  if (cfg.theta_window && !(cfg.theta_window->lo < cfg.theta_window->hi))
    fail(ErrorCode::ConfigError, "theta window must have positive length");
  if (cfg.n_threads < 1) fail(ErrorCode::ConfigError, "threads must be >= 1");
  if (!(cfg.tol > 0)) fail(ErrorCode::ConfigError, "tol must be positive");
  if (cfg.maxit < 1) fail(ErrorCode::ConfigError, "maxit must be >= 1");
}

ExperimentConfig parse_config(std::istream& in, const std::string& source_name) {
  ExperimentConfig cfg;
  std::string line, section;
  int lineno = 0;
  bool have_h = false, have_n = false;

  while (std::getline(in, line)) {
    ++lineno;
    const auto cut = line.find_first_of("#;");
    if (cut != std::string::npos) line.erase(cut);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        parse_fail(source_name, lineno, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "surface" && section != "experiment" && section != "eig" &&
          section != "output")
        parse_fail(source_name, lineno, "unknown section [" + section + "]");
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      parse_fail(source_name, lineno, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      parse_fail(source_name, lineno, "expected 'key = value'");
    if (section.empty())
      parse_fail(source_name, lineno, "key '" + key + "' before any section");

    try {
      if (section == "surface") {
        if (key == "preset") {
          cfg.preset = val;
        } else if (key == "curve") {
          cfg.curve_file = val;
        } else if (key == "B" || key == "a" || key == "b" || key == "c" ||
                   key == "p") {
          if (!cfg.profiles) cfg.profiles.emplace();
          if (key == "B") cfg.profiles->B = val;
          else if (key == "a") cfg.profiles->a = val;
          else if (key == "b") cfg.profiles->b = val;
          else if (key == "c") cfg.profiles->c = val;
          else cfg.profiles->p = to_real(val, source_name, lineno);
        } else if (key == "zmin") {
          cfg.z_min = to_real(val, source_name, lineno);
        } else if (key == "zmax") {
          cfg.z_max = to_real(val, source_name, lineno);
        } else {
          parse_fail(source_name, lineno, "unknown surface key '" + key + "'");
        }
      } else if (section == "experiment") {
        if (key == "mode") {
          cfg.mode = sweep_mode_from_string(val);
        } else if (key == "bc") {
          cfg.bc = bc_from_string(val);
        } else if (key == "kind") {
          cfg.kind = kind_from_string(val);
        } else if (key == "h") {
          have_h = true;
          cfg.h_values.clear();
          for (const std::string& tok : split_ws(val))
            cfg.h_values.push_back(to_real(tok, source_name, lineno));
        } else if (key == "n") {
          have_n = true;
          cfg.h_values.clear();
          long long prev = 0;
          for (const std::string& tok : split_ws(val)) {
            const long long n = to_ll(tok, source_name, lineno);
            if (n < 2)
              fail(ErrorCode::ConfigError, "oscillation index must be >= 2");
            if (n <= prev)
              fail(ErrorCode::ConfigError,
                   "oscillation indices must be strictly increasing");
            prev = n;
            cfg.h_values.push_back(std::pow(Real(n), -4.0));
          }
        } else if (key == "seed") {
          cfg.seed = std::uint64_t(to_ll(val, source_name, lineno));
        } else if (key == "window") {
          const auto toks = split_ws(val);
          if (toks.size() != 2)
            parse_fail(source_name, lineno, "window takes exactly two numbers");
          cfg.theta_window = Interval{to_real(toks[0], source_name, lineno),
                                      to_real(toks[1], source_name, lineno)};
        } else if (key == "threads") {
          cfg.n_threads = int(to_ll(val, source_name, lineno));
        } else {
          parse_fail(source_name, lineno, "unknown experiment key '" + key + "'");
        }
      } else if (section == "eig") {
        if (key == "tol") cfg.tol = to_real(val, source_name, lineno);
        else if (key == "maxit") cfg.maxit = int(to_ll(val, source_name, lineno));
        else if (key == "n_t") cfg.policy.n_t = int(to_ll(val, source_name, lineno));
        else if (key == "n_theta")
          cfg.policy.n_theta = int(to_ll(val, source_name, lineno));
        else if (key == "n_z") cfg.policy.n_z = int(to_ll(val, source_name, lineno));
        else parse_fail(source_name, lineno, "unknown eig key '" + key + "'");
      } else {  // output
        if (key == "dir") cfg.out_dir = val;
        else if (key == "stem") cfg.stem = val;
        else if (key == "format") {
          if (val == "csv") cfg.format = ReportFormat::Csv;
          else if (val == "svg") cfg.format = ReportFormat::Svg;
          else if (val == "both") cfg.format = ReportFormat::Both;
          else parse_fail(source_name, lineno, "unknown format '" + val + "'");
        } else {
          parse_fail(source_name, lineno, "unknown output key '" + key + "'");
        }
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ParseError || e.code() == ErrorCode::ConfigError)
        throw;
      parse_fail(source_name, lineno, strip_code_prefix(e.what()));
    }
  }

  if (have_h && have_n)
    fail(ErrorCode::ConfigError, "give either h or n, not both");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorCode::IoFailure, "cannot open config " + path);
  return parse_config(is, path);
}

namespace {

// "name key=value key=value" with per-preset defaults.
struct PresetArgs {
  std::string name;
  std::vector<std::pair<std::string, Real>> kv;

  Real get(const std::string& key, Real fallback) const {
    for (const auto& [k, v] : kv)
      if (k == key) return v;
    return fallback;
  }
  void check_keys(std::initializer_list<const char*> allowed) const {
    for (const auto& [k, v] : kv) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || k == a;
      if (!ok)
        fail(ErrorCode::ConfigError,
             "preset '" + name + "' does not take a parameter '" + k + "'");
    }
  }
};

PresetArgs parse_preset(const std::string& spec) {
  PresetArgs out;
  const auto toks = split_ws(spec);
  if (toks.empty()) fail(ErrorCode::ConfigError, "empty preset specification");
  out.name = toks[0];
  for (std::size_t i = 1; i < toks.size(); ++i) {
    const auto eq = toks[i].find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::ConfigError, "preset parameter '" + toks[i] +
                                       "' is not of the form key=value");
    std::size_t idx = 0;
    Real v = 0;
    const std::string num = toks[i].substr(eq + 1);
    try {
      v = std::stod(num, &idx);
    } catch (const std::exception&) {
      idx = std::string::npos;
    }
    if (idx != num.size())
      fail(ErrorCode::ConfigError, "preset parameter value '" + num + "' is not a number");
    out.kv.emplace_back(toks[i].substr(0, eq), v);
  }
  return out;
}

}  // namespace

ZeroGaussSurface config_surface(const ExperimentConfig& cfg) {
  validate_surface_source(cfg);
  if (!cfg.preset.empty()) {
    const PresetArgs a = parse_preset(cfg.preset);
    if (a.name == "cylinder-circular") {
      a.check_keys({"radius", "length"});
      return preset_cylinder_circular(a.get("radius", 1.0), a.get("length", 1.0));
    }
    if (a.name == "cylinder-ellipse") {
      a.check_keys({"ax", "ay", "samples", "length"});
      return preset_cylinder_ellipse(a.get("ax", 1.0), a.get("ay", 0.6),
                                     int(a.get("samples", 512)), a.get("length", 1.0));
    }
    if (a.name == "cone-circle") {
      a.check_keys({"colatitude", "zmin", "zmax"});
      return preset_cone_circle(a.get("colatitude", kPi / 4), a.get("zmin", 1.0),
                                a.get("zmax", 2.0));
    }
    if (a.name == "cylinder-flat-patch") {
      a.check_keys({"length"});
      return preset_cylinder_flat_patch(a.get("length", 1.0));
    }
    fail(ErrorCode::ConfigError, "unknown preset '" + a.name + "'");
  }
  if (cfg.profiles) {
    const ProfileSpec& ps = *cfg.profiles;
    if (!(ps.p > 0)) fail(ErrorCode::ConfigError, "profile period p must be positive");
    return build_surface(make_profile(parse_expression(ps.B, "z")),
                         make_profile(parse_expression(ps.a, "theta"), ps.p),
                         make_profile(parse_expression(ps.b, "theta"), ps.p),
                         make_profile(parse_expression(ps.c, "theta"), ps.p), ps.p,
                         Interval{cfg.z_min, cfg.z_max});
  }
  const ArcCurve curve = make_arc_curve(read_curve_file(cfg.curve_file));
  const Interval z{cfg.z_min, cfg.z_max};
  return curve.spherical ? cone_from_curve(curve, z) : cylinder_from_curve(curve, z);
}

// ---------------------------------------------------------------------------
// Sweep
// ---------------------------------------------------------------------------

namespace {

// Longest run of vanishing circumferential curvature, as an arclength
// interval.  Errors when the surface has no flat arc to place a plate on.
Interval find_flat_arc(const ZeroGaussSurface& s) {
  constexpr int kSamples = 4096;
  std::vector<bool> flat(kSamples);
  for (int i = 0; i < kSamples; ++i)
    flat[i] = std::abs(s.c(s.p * Real(i) / kSamples)) <= 1e-12;

  int best_start = -1, best_len = 0, start = -1;
  for (int i = 0; i <= kSamples; ++i) {
    if (i < kSamples && flat[i]) {
      if (start < 0) start = i;
    } else if (start >= 0) {
      if (i - start > best_len) {
        best_len = i - start;
        best_start = start;
      }
      start = -1;
    }
  }
  if (best_len < 8)
    fail(ErrorCode::InvalidArgument,
         "the plate-bending mode needs a flat arc, but the circumferential "
         "curvature never vanishes on a run");
  return {s.p * Real(best_start) / kSamples,
          s.p * Real(best_start + best_len - 1) / kSamples};
}

SweepRow make_row(const ZeroGaussSurface& s, const ExperimentConfig& cfg,
                  SweepMode mode, Real h) {
  const auto t0 = std::chrono::steady_clock::now();
  SweepRow row;
  row.h = h;
  row.n = oscillation_index(h);
  row.mode = mode;
  row.bc = cfg.bc;
  row.kind = cfg.kind;

  if (mode == SweepMode::Eig) {
    const EigResult r =
        korn_constant(s, h, cfg.bc, cfg.policy, cfg.kind, cfg.tol, cfg.maxit, cfg.seed);
    row.value = r.lambda;
    row.iterations = r.iterations;
    row.residual = r.residual;
  } else if (mode == SweepMode::Ansatz) {
    const Smooth2Ptr profile = default_oscillation_profile(s.p, s.z_range);
    AnsatzField field = [&] {
      if (cfg.theta_window) {
        const Smooth2Ptr eta = s2_from_x(s1_bump(cfg.theta_window->midpoint(),
                                                 cfg.theta_window->length() / 2));
        return nonseparable_field(s, oscillating_phi(profile, h, eta), h,
                                  *cfg.theta_window);
      }
      return separable_field(s, oscillating_phi(profile, h), h);
    }();
    QuadratureSpec q;
    q.n_theta = std::max(64, 16 * row.n);
    const KornFunctionals kf = korn_functionals(s, field.field, h, q);
    row.value = cfg.kind == GradientKind::Full ? kf.q_full : kf.q_simp;
  } else {  // Kirchhoff
    const Interval arc = find_flat_arc(s);
    const Smooth2Ptr phi = s2_sep(s1_sin_sq_window(arc.lo, arc.hi),
                                  s1_sin_sq_window(s.z_range.lo, s.z_range.hi));
    row.value = kirchhoff_energies(phi, h, arc, s.z_range).quotient;
  }

  row.wall_ms =
      std::chrono::duration<Real, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();
  return row;
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const ZeroGaussSurface s = config_surface(cfg);

  std::vector<SweepMode> modes;
  if (cfg.mode == SweepMode::Both) {
    modes = {SweepMode::Ansatz, SweepMode::Eig};
  } else {
    modes = {cfg.mode};
  }

  struct Task {
    SweepMode mode;
    Real h;
    SweepRow row;
    std::exception_ptr err;
  };
  std::vector<Task> tasks;
  for (SweepMode m : modes)
    for (Real h : cfg.h_values) tasks.push_back({m, h, {}, nullptr});

  const auto run_task = [&](Task& t) {
    try {
      t.row = make_row(s, cfg, t.mode, t.h);
    } catch (...) {
      t.err = std::current_exception();
    }
  };

  const int workers = std::min<int>(cfg.n_threads, int(tasks.size()));
  if (workers <= 1) {
    for (Task& t : tasks) run_task(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) run_task(tasks[i]);
      });
    for (std::thread& th : pool) th.join();
  }

  // Report the first failure in task order (deterministic regardless of the
  // completion order), annotated with the thickness that failed.
  for (const Task& t : tasks)
    if (t.err) {
      try {
        std::rethrow_exception(t.err);
      } catch (const Error& e) {
        fail(e.code(), strip_code_prefix(e.what()) + " (at h = " + fmt17(t.h) + ")");
      }
    }

  SweepResult out;
  out.seed = cfg.seed;
  out.out_dir = cfg.out_dir;
  out.stem = cfg.stem;
  for (const Task& t : tasks) out.rows.push_back(t.row);
  std::sort(out.rows.begin(), out.rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.mode != b.mode) return int(a.mode) < int(b.mode);
    return a.h > b.h;
  });

  // Fit the eigenvalue series when present, else the only series swept.
  std::vector<SweepRow> series;
  for (const SweepRow& r : out.rows)
    if (r.mode == SweepMode::Eig) series.push_back(r);
  if (series.empty()) series = out.rows;
  if (series.size() >= 3) out.fit = fit_exponent(series);
  return out;
}

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

FitResult fit_exponent(const std::vector<SweepRow>& rows) {
  if (rows.size() < 3)
    fail(ErrorCode::InsufficientData, "exponent fit needs at least 3 rows");
  const int n = int(rows.size());
  std::vector<Real> xs(n), ys(n);
  for (int i = 0; i < n; ++i) {
    if (!(rows[i].value > 0))
      fail(ErrorCode::NonPositiveValue,
           "cannot fit a power law through value " + fmt17(rows[i].value));
    if (!(rows[i].h > 0))
      fail(ErrorCode::NonPositiveValue,
           "cannot fit a power law through thickness " + fmt17(rows[i].h));
    xs[i] = std::log(rows[i].h);
    ys[i] = std::log(rows[i].value);
  }
  Real mx = 0, my = 0;
  for (int i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  Real sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0))
    fail(ErrorCode::InsufficientData, "exponent fit needs distinct thicknesses");

  FitResult fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  Real ss_res = 0;
  for (int i = 0; i < n; ++i) {
    const Real e = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += e * e;
  }
  // A constant series is fitted exactly by the horizontal line; report the
  // fit as perfect rather than dividing zero by zero.
  fit.r_squared = syy > 0 ? std::max(Real(0), 1 - ss_res / syy) : 1.0;
  return fit;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

namespace {

std::string join_path(const std::string& dir, const std::string& name) {
  if (dir.empty() || dir == ".") return name;
  return dir.back() == '/' ? dir + name : dir + "/" + name;
}

void write_csv(const SweepResult& result, const std::string& path) {
  std::ofstream os(path);
  if (!os) fail(ErrorCode::IoFailure, "cannot open " + path + " for writing");
  os << "# h,n,mode,bc,kind,value,iters,residual,wall_ms\n";
  for (const SweepRow& r : result.rows)
    os << fmt17(r.h) << ',' << r.n << ',' << to_string(r.mode) << ','
       << to_string(r.bc) << ',' << to_string(r.kind) << ',' << fmt17(r.value) << ','
       << r.iterations << ',' << fmt17(r.residual) << ',' << fmt17(r.wall_ms) << '\n';
  const Real slope = result.fit ? result.fit->slope
                                : std::numeric_limits<Real>::quiet_NaN();
  const Real r2 = result.fit ? result.fit->r_squared
                             : std::numeric_limits<Real>::quiet_NaN();
  os << "# slope=" << fmt17(slope) << " r2=" << fmt17(r2) << " seed=" << result.seed
     << "\n";
  if (!os.good()) fail(ErrorCode::IoFailure, "short write to " + path);
}

const char* mode_color(SweepMode m) {
  switch (m) {
    case SweepMode::Ansatz: return "#1f77b4";
    case SweepMode::Eig: return "#d62728";
    case SweepMode::Kirchhoff: return "#2ca02c";
    default: return "#333333";
  }
}

void write_svg(const SweepResult& result, const std::string& path) {
  std::ofstream os(path);
  if (!os) fail(ErrorCode::IoFailure, "cannot open " + path + " for writing");

  constexpr Real W = 640, H = 480, ML = 70, MR = 20, MT = 20, MB = 50;
  Real x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
  for (const SweepRow& r : result.rows) {
    const Real lx = std::log10(r.h), ly = std::log10(r.value);
    x_lo = std::min(x_lo, lx);
    x_hi = std::max(x_hi, lx);
    y_lo = std::min(y_lo, ly);
    y_hi = std::max(y_hi, ly);
  }
  const auto pad = [](Real& lo, Real& hi) {
    const Real span = hi - lo;
    const Real d = span > 0 ? 0.08 * span : 0.5;
    lo -= d;
    hi += d;
  };
  pad(x_lo, x_hi);
  pad(y_lo, y_hi);
  const auto px = [&](Real lx) { return ML + (lx - x_lo) / (x_hi - x_lo) * (W - ML - MR); };
  const auto py = [&](Real ly) { return H - MB - (ly - y_lo) / (y_hi - y_lo) * (H - MT - MB); };

  os.precision(6);
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\""
     << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  os << "  <rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H
     << "\" fill=\"white\"/>\n";
  os << "  <line x1=\"" << ML << "\" y1=\"" << H - MB << "\" x2=\"" << W - MR
     << "\" y2=\"" << H - MB << "\" stroke=\"black\"/>\n";
  os << "  <line x1=\"" << ML << "\" y1=\"" << MT << "\" x2=\"" << ML << "\" y2=\""
     << H - MB << "\" stroke=\"black\"/>\n";
  os << "  <text x=\"" << (ML + W - MR) / 2 << "\" y=\"" << H - 12
     << "\" text-anchor=\"middle\" font-size=\"14\">log10 h</text>\n";
  os << "  <text x=\"18\" y=\"" << (MT + H - MB) / 2
     << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 18 "
     << (MT + H - MB) / 2 << ")\">log10 value</text>\n";
  os << "  <text x=\"" << ML << "\" y=\"" << H - MB + 18
     << "\" text-anchor=\"middle\" font-size=\"12\">" << x_lo << "</text>\n";
  os << "  <text x=\"" << W - MR << "\" y=\"" << H - MB + 18
     << "\" text-anchor=\"middle\" font-size=\"12\">" << x_hi << "</text>\n";
  os << "  <text x=\"" << ML - 8 << "\" y=\"" << H - MB
     << "\" text-anchor=\"end\" font-size=\"12\">" << y_lo << "</text>\n";
  os << "  <text x=\"" << ML - 8 << "\" y=\"" << MT + 10
     << "\" text-anchor=\"end\" font-size=\"12\">" << y_hi << "</text>\n";

  if (result.fit) {
    constexpr Real kLn10 = 2.302585092994045684;
    const Real b = result.fit->intercept / kLn10;  // log10 value at h = 1
    const Real ly1 = result.fit->slope * x_lo + b;
    const Real ly2 = result.fit->slope * x_hi + b;
    os << "  <line x1=\"" << px(x_lo) << "\" y1=\"" << py(ly1) << "\" x2=\""
       << px(x_hi) << "\" y2=\"" << py(ly2)
       << "\" stroke=\"#888888\" stroke-dasharray=\"6 3\"/>\n";
    os << "  <text x=\"" << W - MR - 4 << "\" y=\"" << MT + 14
       << "\" text-anchor=\"end\" font-size=\"13\">slope " << result.fit->slope
       << "</text>\n";
  }
  for (const SweepRow& r : result.rows)
    os << "  <circle cx=\"" << px(std::log10(r.h)) << "\" cy=\""
       << py(std::log10(r.value)) << "\" r=\"4\" fill=\"" << mode_color(r.mode)
       << "\"/>\n";
  os << "</svg>\n";
  if (!os.good()) fail(ErrorCode::IoFailure, "short write to " + path);
}

}  // namespace

std::vector<std::string> emit_report(const SweepResult& result, ReportFormat format) {
  if (result.rows.empty())
    fail(ErrorCode::InvalidArgument, "refusing to report an empty sweep");
  for (const SweepRow& r : result.rows)
    if (!(r.value > 0))
      fail(ErrorCode::InvalidArgument, "sweep row has a non-positive value");
  std::vector<std::string> written;
  if (format == ReportFormat::Csv || format == ReportFormat::Both) {
    const std::string path = join_path(result.out_dir, result.stem + ".csv");
    write_csv(result, path);
    written.push_back(path);
  }
  if (format == ReportFormat::Svg || format == ReportFormat::Both) {
    const std::string path = join_path(result.out_dir, result.stem + ".svg");
    write_svg(result, path);
    written.push_back(path);
  }
  return written;
}

ParsedReport parse_report(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorCode::IoFailure, "cannot open report " + path);
  ParsedReport out;
  std::string line;
  int lineno = 0;
  bool have_footer = false;
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::istringstream fs(line.substr(1));
      std::string tok;
      bool footer = false;
      while (fs >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "slope") out.slope = to_real(val, path, lineno), footer = true;
        else if (key == "r2") out.r_squared = to_real(val, path, lineno), footer = true;
        else if (key == "seed")
          out.seed = std::uint64_t(to_ll(val, path, lineno)), footer = true;
      }
      have_footer = have_footer || footer;
      continue;
    }
    std::vector<std::string> f;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(trim(cell));
    if (f.size() != 9) parse_fail(path, lineno, "expected 9 comma-separated fields");
    SweepRow r;
    r.h = to_real(f[0], path, lineno);
    r.n = int(to_ll(f[1], path, lineno));
    r.mode = sweep_mode_from_string(f[2]);
    r.bc = bc_from_string(f[3]);
    r.kind = kind_from_string(f[4]);
    r.value = to_real(f[5], path, lineno);
    r.iterations = int(to_ll(f[6], path, lineno));
    r.residual = to_real(f[7], path, lineno);
    r.wall_ms = to_real(f[8], path, lineno);
    out.rows.push_back(r);
  }
  if (!have_footer) fail(ErrorCode::ParseError, path + ": missing footer line");
  return out;
}

}  // namespace kslab
