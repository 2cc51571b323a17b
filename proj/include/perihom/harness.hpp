#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "perihom/cell_solver.hpp"
#include "perihom/config.hpp"
#include "perihom/io.hpp"
#include "perihom/macro_solver.hpp"
#include "perihom/micro_solver.hpp"

namespace perihom {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitSolver = 3, kExitInvariant = 4 };

struct RunOptions {
  std::string mode;
  std::string out_dir;  // empty: from config
  bool strict = false;
  int parallel = 1;
  std::ostream* log = &std::cerr;
};

// ---- builders ----------------------------------------------------------------------

inline std::vector<std::array<double, 2>> cell_centres(const MaskedGrid& g) {
  std::vector<std::array<double, 2>> pts(g.cell_count());
  for (int c = 0; c < g.cell_count(); ++c) pts[c] = {g.x(g.ci(c)), g.y(g.cj(c))};
  return pts;
}

inline std::vector<std::array<double, 2>> site_points(const CoupledSystem& sys, const std::vector<BoundaryFace>* faces) {
  std::vector<std::array<double, 2>> pts;
  const auto& g = sys.grid;
  for (std::size_t k = 0; k < sys.sites.size(); ++k) {
    if (faces)
      pts.push_back((*faces)[k].midpoint);
    else
      pts.push_back({g.x(g.ci(sys.sites[k].cell)), g.y(g.cj(sys.sites[k].cell))});
  }
  return pts;
}

/// Initial state sampled at cell centres and deposit sites; grain cells zero.
inline FieldState make_initial(const RunConfig& c, const MaskedGrid& g, const std::vector<std::array<double, 2>>& sites) {
  const auto centres = cell_centres(g);
  FieldState s;
  auto masked = [&](std::vector<double> f) {
    for (int k = 0; k < g.cell_count(); ++k)
      if (!g.is_pore(k)) f[k] = 0.0;
    return f;
  };
  s.theta = masked(sample_initial(c.theta0, centres));
  for (int p = 0; p < c.species; ++p) {
    s.u.push_back(masked(sample_initial(c.u0[p], centres)));
    s.v.push_back(sample_initial(c.v0[p], sites));
  }
  return s;
}

inline TimeControls make_time(const RunConfig& c) { return TimeControls{c.dt, c.t_end, c.fp_tol, c.fp_max}; }

inline MicroRunConfig make_micro_config(const RunConfig& c, double epsilon) {
  MicroRunConfig m;
  const UnitCell cell = make_unit_cell(c);
  m.domain = tile_domain(cell, epsilon);
  m.coefficients = make_cell_coefficients(c, cell);
  m.kernel = make_kernel(c);
  m.reaction = c.reaction;
  m.auto_threshold = !c.threshold.has_value();
  m.deposition = make_deposition(c);
  m.g0 = c.g0;
  m.mollifier.delta = c.mollifier_delta;
  m.time = make_time(c);
  return m;
}

struct CellRun {
  UnitCell cell;
  CellResult result;
  std::vector<KrylovReport> residuals;
};

inline CellRun run_cell_problems(const RunConfig& c) {
  CellRun r;
  r.cell = make_unit_cell(c);
  const auto coeffs = make_cell_coefficients(c, r.cell);
  CorrectorOptions copts{c.corrector_tol, c.corrector_max_iter};
  r.result = compute_effective_tensors(r.cell, coeffs, make_deposition(c), c.g0, copts);
  for (const auto& s : r.result.correctors.theta) r.residuals.push_back(s.report);
  for (const auto& sp : r.result.correctors.u)
    for (const auto& s : sp) r.residuals.push_back(s.report);
  return r;
}

inline EffectiveTensors explicit_tensors(const RunConfig& c) {
  const auto& o = c.tensor_values;
  EffectiveTensors t;
  t.K = o.K;
  t.K0 = 0.5 * o.K.trace();
  t.T = o.T;
  t.D = o.D;
  t.F = o.F;
  t.g_robin = o.g_robin;
  t.measures.pore_area = 1.0;
  t.measures.perimeter = o.exchange_ratio;
  for (int p = 0; p < c.species; ++p) {
    t.T0.push_back(0.5 * o.T[p].trace());
    t.D0.push_back(0.5 * o.D[p].trace());
    t.F0.push_back(0.5 * o.F[p].trace());
    t.A.push_back(c.a[p] * o.exchange_ratio);
    t.B.push_back(c.b[p] * o.exchange_ratio);
    t.D_asymmetry.push_back(0.0);
  }
  return t;
}

inline EffectiveTensors macro_tensors(const RunConfig& c) {
  if (c.tensor_source == "explicit") return explicit_tensors(c);
  if (c.tensor_source == "file") {
    std::ifstream in(c.tensor_file, std::ios::binary);
    if (!in) throw ConfigError("tensors.path: cannot open '" + c.tensor_file + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("tensors.path: " + std::string(e.what()));
    }
    EffectiveTensors t = tensors_from_json(j);
    if (t.species() != c.species) throw ConfigError("tensors.path: species count differs from the config");
    return t;
  }
  return run_cell_problems(c).result.tensors;
}

inline MacroRunConfig make_macro_config(const RunConfig& c, const EffectiveTensors& t) {
  MacroRunConfig m;
  m.resolution = c.macro_resolution;
  m.tensors = t;
  m.deposition = make_deposition(c);
  m.kernel = make_kernel(c);
  m.reaction = c.reaction;
  m.auto_threshold = !c.threshold.has_value();
  m.mollifier.delta = c.mollifier_delta;
  m.time = make_time(c);
  return m;
}

// ---- manifest ----------------------------------------------------------------------

inline void write_manifest(OutputDir& out, const RunConfig& c, const std::string& mode, const std::string& status,
                           const InvariantAudit* audit) {
  nlohmann::json m;
  m["tool"] = "perihom";
  m["version"] = kVersion;
  m["mode"] = mode;
  m["status"] = status;
  m["config_sha256"] = sha256_hex(c.canonical);
  m["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                       std::to_string(EIGEN_MINOR_VERSION);
  if (audit) {
    m["invariant_audit"] = {{"violations", audit->violations}, {"messages", audit->messages}};
  }
  nlohmann::json files = nlohmann::json::object();
  for (const auto& [name, hash] : out.hashes()) files[name] = {{"sha256", hash}};
  m["files"] = files;
  out.write("manifest.json", m.dump(2) + "\n");
}

// ---- modes -------------------------------------------------------------------------

inline std::string corrector_csv(const CellRun& r) {
  const auto& g = r.cell.grid;
  const auto& cor = r.result.correctors;
  std::ostringstream o;
  o << "x,y,theta_1,theta_2";
  for (std::size_t p = 1; p <= cor.u.size(); ++p) o << ",u" << p << "_1,u" << p << "_2";
  o << '\n';
  for (int c : g.pore_cells()) {
    o << fmt(g.x(g.ci(c))) << ',' << fmt(g.y(g.cj(c))) << ',' << fmt(cor.theta[0].field[c]) << ','
      << fmt(cor.theta[1].field[c]);
    for (const auto& sp : cor.u) o << ',' << fmt(sp[0].field[c]) << ',' << fmt(sp[1].field[c]);
    o << '\n';
  }
  return o.str();
}

inline int run_cell_mode(const RunConfig& c, OutputDir& out, std::ostream& log) {
  const CellRun r = run_cell_problems(c);
  const auto& t = r.result.tensors;
  out.write("tensors.csv", tensors_csv(t));
  out.write("tensors.json", tensors_text(t, r.residuals));
  out.write("correctors.csv", corrector_csv(r));
  out.write("mask.csv", mask_csv(r.cell.grid));
  out.write("mask.pgm", mask_pgm(r.cell.grid));
  if (c.mollifier_delta > 0.0)
    out.write("kernel.csv", kernel_csv(MollifierKernel::build(c.mollifier_delta, 1.0 / c.macro_resolution)));
  for (const auto& w : t.warnings) log << "warning: " << w << '\n';
  log << "K = [[" << fmt(t.K(0, 0)) << ", " << fmt(t.K(0, 1)) << "], [" << fmt(t.K(1, 0)) << ", " << fmt(t.K(1, 1))
      << "]]  |Y1| = " << fmt(t.measures.pore_area) << "  |Gamma| = " << fmt(t.measures.perimeter) << '\n';
  write_manifest(out, c, "cell", "ok", nullptr);
  return kExitOk;
}

struct SnapshotWriter {
  OutputDir& out;
  const RunConfig& cfg;
  const MaskedGrid& grid;
  std::vector<std::array<double, 2>> sites;
  long steps = 0;

  void operator()(const FieldState& s, const StepDiagnostics& d) const {
    const bool last = d.step == steps;
    const bool cadence = cfg.snapshot_every > 0 && d.step % cfg.snapshot_every == 0;
    if (!(d.step == 0 || last || cadence)) return;
    const std::string tag = fmt(s.t);
    out.write("snap_" + tag + ".csv", snapshot_csv(grid, s));
    if (!sites.empty()) out.write("deposit_" + tag + ".csv", deposit_csv(sites, s));
    if (cfg.vtk) out.write("snap_" + tag + ".vtk", snapshot_vtk(grid, s));
  }
};

inline long step_count(const TimeControls& t) {
  return t.t_end > 0.0 ? static_cast<long>(std::ceil(t.t_end / t.dt - 1e-9)) : 0;
}

inline int finish_run(const RunConfig& c, OutputDir& out, const std::string& mode, const Trajectory& tr, int species,
                      bool strict, std::ostream& log) {
  out.write("diag.csv", diagnostics_csv(tr.diagnostics, species));
  for (const auto& m : tr.audit.messages) log << "invariant: " << m << '\n';
  const bool failed = strict && tr.audit.violations > 0;
  write_manifest(out, c, mode, failed ? "invariant_violation" : "ok", &tr.audit);
  if (!tr.diagnostics.empty()) {
    const auto& d = tr.diagnostics.back();
    log << mode << ": t = " << fmt(d.t) << ", theta in [" << fmt(d.theta_min) << ", " << fmt(d.theta_max)
        << "], monomer mass " << fmt(d.monomer_mass) << ", audit violations " << tr.audit.violations << '\n';
  }
  return failed ? kExitInvariant : kExitOk;
}

inline int run_micro_mode(const RunConfig& c, OutputDir& out, bool strict, std::ostream& log) {
  const MicroRunConfig mc = make_micro_config(c, c.epsilon);
  MicroSolver solver(mc);
  const auto& sys = solver.system();
  const FieldState init = make_initial(c, sys.grid, site_points(sys, &mc.domain.faces));
  out.write("mask.csv", mask_csv(sys.grid));
  out.write("mask.pgm", mask_pgm(sys.grid));
  if (sys.mollifier) out.write("kernel.csv", kernel_csv(*sys.mollifier));
  SnapshotWriter snap{out, c, sys.grid, site_points(sys, &mc.domain.faces), step_count(mc.time)};
  const Trajectory tr = solver.simulate(init, mc.time, snap);
  return finish_run(c, out, "micro", tr, c.species, strict, log);
}

inline int run_macro_mode(const RunConfig& c, OutputDir& out, bool strict, std::ostream& log) {
  const EffectiveTensors t = macro_tensors(c);
  out.write("tensors.csv", tensors_csv(t));
  MacroSolver solver(make_macro_config(c, t));
  const auto& sys = solver.system();
  const FieldState init = make_initial(c, sys.grid, site_points(sys, nullptr));
  if (sys.mollifier) out.write("kernel.csv", kernel_csv(*sys.mollifier));
  SnapshotWriter snap{out, c, sys.grid, site_points(sys, nullptr), step_count(solver.config().time)};
  const Trajectory tr = solver.simulate(init, solver.config().time, snap);
  return finish_run(c, out, "macro", tr, c.species, strict, log);
}

struct ConvergeRow {
  double epsilon = 0.0;
  double error = 0.0;
  double theta_error = 0.0;
  std::vector<double> u_error;
  int violations = 0;
};

/// e(eps) = ||theta^eps - theta_0|| + sum_i ||u_i^eps - u_i0|| in L2 over the
/// pore cells, the macroscopic fields interpolated to the micro cell centres.
inline ConvergeRow compare_to_macro(const MaskedGrid& micro, const FieldState& ms, int macro_n, const FieldState& mac) {
  ConvergeRow r;
  auto err = [&](const std::vector<double>& f, const std::vector<double>& ref) {
    double s = 0.0;
    for (int c : micro.pore_cells()) {
      const double d = f[c] - interpolate(ref, macro_n, micro.x(micro.ci(c)), micro.y(micro.cj(c)));
      s += d * d;
    }
    return std::sqrt(s * micro.h() * micro.h());
  };
  r.theta_error = err(ms.theta, mac.theta);
  r.error = r.theta_error;
  for (int p = 0; p < ms.species(); ++p) {
    r.u_error.push_back(err(ms.u[p], mac.u[p]));
    r.error += r.u_error.back();
  }
  return r;
}

inline std::string converge_csv(const std::vector<ConvergeRow>& rows) {
  std::ostringstream o;
  o << "epsilon,error,ratio,theta_error";
  if (!rows.empty())
    for (std::size_t p = 1; p <= rows.front().u_error.size(); ++p) o << ",u" << p << "_error";
  o << '\n';
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    o << fmt(r.epsilon) << ',' << fmt(r.error) << ',';
    // ratio e(2 eps) / e(eps) when the coarser value is in the table
    for (const auto& q : rows)
      if (std::abs(q.epsilon - 2.0 * r.epsilon) < 1e-12 * r.epsilon) o << fmt(q.error / r.error);
    o << ',' << fmt(r.theta_error);
    for (double e : r.u_error) o << ',' << fmt(e);
    o << '\n';
  }
  return o.str();
}

struct ConvergeResult {
  EffectiveTensors tensors;
  std::vector<ConvergeRow> rows;
  bool complete = false;
  std::string failure;
};

/// Cell problems once, the macroscopic run once, one microscopic run per eps.
/// `on_row` sees the table after every completed row.
inline ConvergeResult converge_study(const RunConfig& c, int parallel,
                                     const std::function<void(const ConvergeResult&)>& on_row = {},
                                     std::ostream* log = nullptr) {
  ConvergeResult res;
  res.tensors = run_cell_problems(c).result.tensors;
  const MacroRunConfig mac_cfg = make_macro_config(c, res.tensors);
  MacroSolver mac(mac_cfg);
  const FieldState mac_init = make_initial(c, mac.system().grid, site_points(mac.system(), nullptr));
  const Trajectory mac_tr = mac.simulate(mac_init, mac_cfg.time);
  if (log) *log << "converge: macro run done on " << c.macro_resolution << "^2 cells\n";

  auto one = [&c, &mac_tr](double eps) {
    const MicroRunConfig mc = make_micro_config(c, eps);
    MicroSolver solver(mc);
    const auto& sys = solver.system();
    const FieldState init = make_initial(c, sys.grid, site_points(sys, &mc.domain.faces));
    const Trajectory tr = solver.simulate(init, mc.time);
    ConvergeRow row = compare_to_macro(sys.grid, tr.final_state, c.macro_resolution, mac_tr.final_state);
    row.epsilon = mc.domain.epsilon;
    row.violations = tr.audit.violations;
    return row;
  };

  const std::size_t n = c.epsilons.size();
  const std::size_t width = static_cast<std::size_t>(std::max(1, parallel));
  for (std::size_t start = 0; start < n; start += width) {
    std::vector<std::future<ConvergeRow>> jobs;
    for (std::size_t k = start; k < std::min(n, start + width); ++k)
      jobs.push_back(std::async(width > 1 ? std::launch::async : std::launch::deferred, one, c.epsilons[k]));
    for (auto& j : jobs) {
      try {
        res.rows.push_back(j.get());
      } catch (const std::exception& e) {
        res.failure = e.what();
      }
      if (!res.failure.empty()) break;
      if (log) *log << "converge: eps = " << fmt(res.rows.back().epsilon) << "  e = " << fmt(res.rows.back().error) << '\n';
      if (on_row) on_row(res);
    }
    if (!res.failure.empty()) return res;
  }
  res.complete = true;
  return res;
}

inline int run_converge_mode(const RunConfig& c, OutputDir& out, int parallel, bool strict, std::ostream& log) {
  const auto write_table = [&](const ConvergeResult& r) { out.write("converge.csv", converge_csv(r.rows)); };
  ConvergeResult res = converge_study(c, parallel, write_table, &log);
  out.write("tensors.csv", tensors_csv(res.tensors));
  write_table(res);
  InvariantAudit audit;
  for (const auto& r : res.rows) audit.violations += r.violations;
  if (!res.complete) {
    write_manifest(out, c, "converge", "solver_error", &audit);
    throw SolverError("converge study aborted (partial table kept): " + res.failure, 0.0);
  }
  const bool failed = strict && audit.violations > 0;
  write_manifest(out, c, "converge", failed ? "invariant_violation" : "ok", &audit);
  return failed ? kExitInvariant : kExitOk;
}

/// Mode dispatch with the exit-code contract: config errors 2, solver
/// errors 3, invariant violations under strict 4.
inline int run(const RunConfig& cfg, const RunOptions& opt) {
  std::ostream& log = *opt.log;
  try {
    if (!cfg.mode.empty() && cfg.mode != opt.mode)
      throw ConfigError("mode: config says '" + cfg.mode + "' but '" + opt.mode + "' was requested");
    if (opt.parallel < 1) throw ConfigError("--parallel must be at least 1");
    const bool strict = opt.strict || cfg.strict;
    OutputDir out(opt.out_dir.empty() ? cfg.out_dir : opt.out_dir);
    if (opt.mode == "cell") return run_cell_mode(cfg, out, log);
    if (opt.mode == "micro") return run_micro_mode(cfg, out, strict, log);
    if (opt.mode == "macro") return run_macro_mode(cfg, out, strict, log);
    if (opt.mode == "converge") return run_converge_mode(cfg, out, opt.parallel, strict, log);
    throw ConfigError("unknown mode '" + opt.mode + "' (cell, micro, macro, converge)");
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const GeometryError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const KineticsError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const MollifierError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    log << "solver error: " << e.what() << '\n';
    return kExitSolver;
  }
}

inline int run_file(const std::string& config_path, const RunOptions& opt) {
  RunConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const ConfigError& e) {
    *opt.log << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  return run(cfg, opt);
}

}  // namespace perihom
