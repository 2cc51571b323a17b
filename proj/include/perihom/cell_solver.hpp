#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "perihom/geometry.hpp"
#include "perihom/kinetics.hpp"
#include "perihom/linear.hpp"

namespace perihom {

/// Cell coefficients sampled on the unit-cell grid (one value per cell).
/// tau and dufour are per species; a single Soret coefficient is the case
/// of identical tau fields.
struct CellCoefficients {
  std::vector<double> kappa;
  std::vector<std::vector<double>> tau;
  std::vector<std::vector<double>> diffusion;
  std::vector<std::vector<double>> dufour;

  int species() const { return static_cast<int>(diffusion.size()); }

  static CellCoefficients uniform(int cells, int species, double kappa, double tau, double d, double dufour) {
    CellCoefficients c;
    c.kappa.assign(cells, kappa);
    c.tau.assign(species, std::vector<double>(cells, tau));
    c.diffusion.assign(species, std::vector<double>(cells, d));
    c.dufour.assign(species, std::vector<double>(cells, dufour));
    return c;
  }
};

struct CorrectorOptions {
  double tol = 1e-10;
  int max_iter = 50000;
};

struct CorrectorSolution {
  std::vector<double> field;  // zero on grain cells
  KrylovReport report;
};

namespace detail {

inline double harmonic(double a, double b) { return 2.0 * a * b / (a + b); }

inline std::pair<int, int> wrap(const UnitCell& cell, int i, int j) {
  const int n = cell.resolution;
  return {((i % n) + n) % n, ((j % n) + n) % n};
}

}  // namespace detail

/// Periodic corrector of one direction:
///   sum over open faces of coeff_f [(chi_nb - chi_P)/h + n_f . e_dir] h = 0
/// on every pore cell, i.e. the flux form of div(coeff (grad chi + e_dir)) = 0
/// with zero normal flux of coeff (grad chi + e_dir) on the grain.
inline CorrectorSolution solve_corrector(std::span<const double> coeff, const UnitCell& cell, int direction,
                                         const CorrectorOptions& opts = {}) {
  if (direction != 0 && direction != 1) throw Error("corrector direction must be 0 or 1");
  const auto& g = cell.grid;
  const double h = g.h();
  for (int c : g.pore_cells())
    if (!(coeff[c] > 0.0)) throw Error("cell coefficient must be bounded below by a positive constant");

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(g.pore_count()) * 5);
  Vector rhs = Vector::Zero(g.pore_count());
  for (int c : g.pore_cells()) {
    const int row = g.unknown(c);
    double diag = 0.0;
    for (Side s : kSides) {
      const auto [a, b] = detail::wrap(cell, g.ci(c) + side_di(s), g.cj(c) + side_dj(s));
      const int nb = g.index(a, b);
      if (!g.is_pore(nb)) continue;
      const double kf = detail::harmonic(coeff[c], coeff[nb]);
      diag += kf;
      trip.emplace_back(row, g.unknown(nb), -kf);
      const int normal = direction == 0 ? side_di(s) : side_dj(s);
      rhs[row] += h * kf * normal;
    }
    if (diag == 0.0) throw SolverError("isolated pore cell in the unit cell", 0.0);
    trip.emplace_back(row, row, diag);
  }
  SparseMatrix a(g.pore_count(), g.pore_count());
  a.setFromTriplets(trip.begin(), trip.end());

  CorrectorSolution sol;
  Vector x;
  sol.report = pcg_mean_zero(a, rhs, x, opts.tol, opts.max_iter);
  sol.field.assign(g.cell_count(), 0.0);
  for (int c : g.pore_cells()) sol.field[c] = x[g.unknown(c)];
  return sol;
}

struct Correctors {
  std::array<CorrectorSolution, 2> theta;
  std::vector<std::array<CorrectorSolution, 2>> u;
};

inline Correctors solve_correctors(const CellCoefficients& coeffs, const UnitCell& cell,
                                   const CorrectorOptions& opts = {}) {
  Correctors cor;
  for (int d = 0; d < 2; ++d) cor.theta[d] = solve_corrector(coeffs.kappa, cell, d, opts);
  cor.u.resize(coeffs.species());
  for (int p = 0; p < coeffs.species(); ++p)
    for (int d = 0; d < 2; ++d) cor.u[p][d] = solve_corrector(coeffs.diffusion[p], cell, d, opts);
  return cor;
}

using Matrix2 = Eigen::Matrix2d;

struct EffectiveTensors {
  Matrix2 K = Matrix2::Identity();
  std::vector<Matrix2> T, D, F;
  std::vector<double> A, B;
  double g_robin = 0.0;

  // constituents
  double K0 = 1.0;
  std::vector<double> T0, D0, F0;
  CellMeasures measures;
  double K_asymmetry = 0.0;
  std::vector<double> D_asymmetry;
  std::vector<std::string> warnings;

  int species() const { return static_cast<int>(D.size()); }
  double exchange_ratio() const { return measures.perimeter / measures.pore_area; }
  /// Cell-volume average of the flux, (1/|Y|) int_{Y1}: the porous-medium
  /// conductivity, |Y1| times K.
  Matrix2 bulk_K() const { return measures.pore_area * K; }
};

namespace detail {

/// G(i, j) = (1/|Y1|) int_{Y1} w d(chi^j)/dy_i, where chi^j = corr[j].
///
/// The cell value of d/dy_i is the mean of its two face difference quotients;
/// a face closed by grain contributes the boundary value -delta_ij.
inline Matrix2 gradient_moment(std::span<const double> weight, const std::array<CorrectorSolution, 2>& corr,
                               const UnitCell& cell) {
  const auto& g = cell.grid;
  const double h = g.h();
  Matrix2 m = Matrix2::Zero();
  for (int j = 0; j < 2; ++j) {
    const auto& chi = corr[j].field;
    for (int c : g.pore_cells()) {
      const int ci = g.ci(c), cj = g.cj(c);
      for (int i = 0; i < 2; ++i) {
        const int di = i == 0 ? 1 : 0, dj = i == 0 ? 0 : 1;
        const auto [pa, pb] = wrap(cell, ci + di, cj + dj);
        const auto [ma, mb] = wrap(cell, ci - di, cj - dj);
        const int plus = g.index(pa, pb), minus = g.index(ma, mb);
        const double wall = i == j ? -1.0 : 0.0;
        const double gp = g.is_pore(plus) ? (chi[plus] - chi[c]) / h : wall;
        const double gm = g.is_pore(minus) ? (chi[c] - chi[minus]) / h : wall;
        m(i, j) += weight[c] * 0.5 * (gp + gm);
      }
    }
  }
  return m * (h * h / cell.measures.pore_area);
}

/// Mean over Y1, taken relative to the first pore value so constants are exact.
inline double pore_mean(std::span<const double> f, const UnitCell& cell) {
  const auto& pores = cell.grid.pore_cells();
  if (pores.empty()) return 0.0;
  const double anchor = f[pores.front()];
  double s = 0.0;
  for (int c : pores) s += f[c] - anchor;
  return anchor + s * cell.h() * cell.h() / cell.measures.pore_area;
}

inline double asymmetry(const Matrix2& m) {
  const double norm = m.norm();
  return norm > 0.0 ? (m - m.transpose()).norm() / norm : 0.0;
}

}  // namespace detail

struct AssemblyOptions {
  double warn_asymmetry = 1e-6;
  double max_asymmetry = 1e-2;
};

/// Effective coefficients of the upscaled system:
///   K = K0 I + (K_ij),  K_ij = <kappa d theta^j / dy_i>
///   T^p = T0 I + (T_jk), T_jk = <tau_p d theta^j / dy_k>
///   D^p = D_p I + (<d_p d u_p^j / dy_k>)_jk,  F^p likewise with dufour_p
///   A_p = a_p |Gamma| / |Y1|,  B_p = b_p |Gamma| / |Y1|,  g0 |Gamma_R| / |Y1|
/// with <.> = (1/|Y1|) int_{Y1}. K and D^p are replaced by their symmetric
/// parts; the relative asymmetry is kept in the result.
inline EffectiveTensors assemble_tensors(const Correctors& cor, const CellCoefficients& coeffs, const UnitCell& cell,
                                         const DepositionParams& dep, double g0, const AssemblyOptions& opts = {}) {
  const int np = coeffs.species();
  if (static_cast<int>(cor.u.size()) != np || dep.species() != np)
    throw Error("assemble_tensors: species count mismatch");
  EffectiveTensors t;
  t.measures = cell.measures;

  auto symmetrise = [&](Matrix2& m, const std::string& name) {
    const double asym = detail::asymmetry(m);
    if (asym > opts.max_asymmetry)
      throw SolverError(name + " asymmetry " + std::to_string(asym) + " indicates a broken discretisation", asym);
    if (asym > opts.warn_asymmetry) t.warnings.push_back(name + " asymmetry " + std::to_string(asym));
    m = 0.5 * (m + m.transpose()).eval();
    return asym;
  };

  t.K0 = detail::pore_mean(coeffs.kappa, cell);
  t.K = t.K0 * Matrix2::Identity() + detail::gradient_moment(coeffs.kappa, cor.theta, cell);
  t.K_asymmetry = symmetrise(t.K, "K");

  const double ratio = cell.measures.perimeter / cell.measures.pore_area;
  for (int p = 0; p < np; ++p) {
    const double tau0 = detail::pore_mean(coeffs.tau[p], cell);
    t.T0.push_back(tau0);
    t.T.push_back(tau0 * Matrix2::Identity() + detail::gradient_moment(coeffs.tau[p], cor.theta, cell).transpose());

    const double d0 = detail::pore_mean(coeffs.diffusion[p], cell);
    t.D0.push_back(d0);
    Matrix2 d = d0 * Matrix2::Identity() + detail::gradient_moment(coeffs.diffusion[p], cor.u[p], cell).transpose();
    t.D_asymmetry.push_back(symmetrise(d, "D" + std::to_string(p + 1)));
    t.D.push_back(d);

    const double f0 = detail::pore_mean(coeffs.dufour[p], cell);
    t.F0.push_back(f0);
    t.F.push_back(f0 * Matrix2::Identity() + detail::gradient_moment(coeffs.dufour[p], cor.u[p], cell).transpose());

    t.A.push_back(dep.a[p] * ratio);
    t.B.push_back(dep.b[p] * ratio);
  }
  t.g_robin = g0 * cell.measures.robin_perimeter / cell.measures.pore_area;
  return t;
}

struct CellResult {
  Correctors correctors;
  EffectiveTensors tensors;
};

inline CellResult compute_effective_tensors(const UnitCell& cell, const CellCoefficients& coeffs,
                                            const DepositionParams& dep, double g0,
                                            const CorrectorOptions& copts = {}, const AssemblyOptions& aopts = {}) {
  CellResult r;
  r.correctors = solve_correctors(coeffs, cell, copts);
  r.tensors = assemble_tensors(r.correctors, coeffs, cell, dep, g0, aopts);
  return r;
}

}  // namespace perihom
