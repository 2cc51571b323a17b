#pragma once

#include <functional>
#include <vector>

#include "perihom/cell_solver.hpp"
#include "perihom/coupled.hpp"
#include "perihom/micro_solver.hpp"

namespace perihom {

/// The upscaled problem on an unperforated n x n grid of the unit square.
struct MacroRunConfig {
  int resolution = 64;
  EffectiveTensors tensors;
  DepositionParams deposition;  // pointwise a_p, b_p of the deposit ODE
  CoagulationKernel kernel;
  bool reaction = false;
  bool auto_threshold = true;
  MollifierSpec mollifier;
  TimeControls time;
  std::function<double(double, double, double)> heat_source;
};

inline CoupledSystem build_macro_system(const MacroRunConfig& cfg) {
  if (cfg.resolution < 2) throw Error("macro resolution must be at least 2");
  const auto& t = cfg.tensors;
  const int n = t.species();
  if (static_cast<int>(t.T.size()) != n || static_cast<int>(t.F.size()) != n || cfg.deposition.species() != n)
    throw Error("macro problem: species count mismatch");

  CoupledSystem sys;
  sys.grid = MaskedGrid::full(cfg.resolution);
  const auto& g = sys.grid;
  const int cells = g.cell_count();
  auto check_tensor = [](const Eigen::Matrix2d& m, const std::string& name) {
    if (!(m(0, 0) > 0.0 && m(1, 1) > 0.0 && m.determinant() > 0.0))
      throw Error(name + " must be positive definite");
    if (m(0, 1) != m(1, 0)) throw Error(name + " must be symmetric");
  };
  check_tensor(t.K, "K");
  sys.heat_conductance = tensor_conductances(g, t.K(0, 0), t.K(1, 1), t.K(0, 1));
  sys.kappa0 = std::max(0.0, std::min(t.K(0, 0), t.K(1, 1)) - std::abs(t.K(0, 1)));
  if (!(t.g_robin >= 0.0)) throw Error("Robin coefficient must be nonnegative");
  sys.heat_sink.assign(cells, t.g_robin);

  const double ratio = t.measures.pore_area > 0.0 ? t.measures.perimeter / t.measures.pore_area : 0.0;
  if (ratio > 0.0)
    for (int c = 0; c < cells; ++c) sys.sites.push_back({c, ratio});

  for (int p = 0; p < n; ++p) {
    check_tensor(t.D[p], "D" + std::to_string(p + 1));
    sys.species_conductance.push_back(tensor_conductances(g, t.D[p](0, 0), t.D[p](1, 1), t.D[p](0, 1)));
    sys.heat_drift.push_back(Drift{{}, t.T[p]});
    sys.species_drift.push_back(Drift{{}, t.F[p].transpose()});
  }
  sys.deposition = cfg.deposition;
  sys.kernel = cfg.kernel;
  sys.reaction = cfg.reaction;
  sys.auto_threshold = cfg.auto_threshold;
  sys.heat_source = cfg.heat_source;
  if (cfg.mollifier.delta > 0.0) sys.mollifier = MollifierKernel::build(cfg.mollifier.delta, g.h());
  return sys;
}

class MacroSolver : public CoupledSolver {
 public:
  explicit MacroSolver(const MacroRunConfig& cfg) : CoupledSolver(build_macro_system(cfg)), cfg_(cfg) {}

  const MacroRunConfig& config() const noexcept { return cfg_; }

 private:
  MacroRunConfig cfg_;
};

inline Trajectory simulate_macro(const MacroRunConfig& cfg, const FieldState& initial,
                                 const StepObserver& observe = {}) {
  MacroSolver solver(cfg);
  return solver.simulate(initial, cfg.time, observe);
}

/// Bilinear interpolation of a cell-centred field on a full n x n grid of
/// the unit square, constant extension beyond the outermost centres.
inline double interpolate(const std::vector<double>& f, int n, double x, double y) {
  const double h = 1.0 / n;
  auto locate = [&](double s, int& i0, double& w) {
    double q = s / h - 0.5;
    q = std::clamp(q, 0.0, static_cast<double>(n - 1));
    i0 = std::min(static_cast<int>(q), n - 2);
    w = q - i0;
  };
  int i0, j0;
  double wx, wy;
  locate(x, i0, wx);
  locate(y, j0, wy);
  const double f00 = f[j0 * n + i0], f10 = f[j0 * n + i0 + 1];
  const double f01 = f[(j0 + 1) * n + i0], f11 = f[(j0 + 1) * n + i0 + 1];
  return (1 - wy) * ((1 - wx) * f00 + wx * f10) + wy * ((1 - wx) * f01 + wx * f11);
}

}  // namespace perihom
