#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "perihom/grid.hpp"
#include "perihom/linear.hpp"
#include "perihom/mollifier.hpp"

namespace perihom {

/// Face conductances of a masked grid. kx[j*n+i] couples (i,j)-(i+1,j),
/// ky[j*n+i] couples (i,j)-(i,j+1); closed faces carry zero. `cross` is a
/// constant off-diagonal tensor entry, discretised on interior vertices.
struct Conductances {
  std::vector<double> kx, ky;
  double cross = 0.0;
  bool with_cross = false;
};

/// Harmonic face averages of a cell coefficient; faces touching grain or
/// leaving the domain are closed.
inline Conductances harmonic_conductances(const MaskedGrid& g, std::span<const double> coeff) {
  const int n = g.n();
  Conductances k;
  k.kx.assign(g.cell_count(), 0.0);
  k.ky.assign(g.cell_count(), 0.0);
  auto hm = [](double a, double b) { return 2.0 * a * b / (a + b); };
  for (int c : g.pore_cells()) {
    const int i = g.ci(c), j = g.cj(c);
    if (g.is_pore(i + 1, j)) k.kx[c] = hm(coeff[c], coeff[g.index(i + 1, j)]);
    if (g.is_pore(i, j + 1)) k.ky[c] = hm(coeff[c], coeff[g.index(i, j + 1)]);
  }
  (void)n;
  return k;
}

/// Constant diagonal tensor entries on every open face plus the off-diagonal.
inline Conductances tensor_conductances(const MaskedGrid& g, double kxx, double kyy, double kxy) {
  Conductances k;
  k.kx.assign(g.cell_count(), 0.0);
  k.ky.assign(g.cell_count(), 0.0);
  for (int c : g.pore_cells()) {
    const int i = g.ci(c), j = g.cj(c);
    if (g.is_pore(i + 1, j)) k.kx[c] = kxx;
    if (g.is_pore(i, j + 1)) k.ky[c] = kyy;
  }
  k.cross = kxy;
  k.with_cross = kxy != 0.0;
  return k;
}

/// Row data of one backward-Euler step per unit cell area:
///   phi/dt - div(K grad phi) - w . grad phi + sink phi = rhs.
struct TransportTerms {
  double inv_dt = 0.0;
  const Conductances* conductance = nullptr;
  const VectorField* velocity = nullptr;  // w, may be null
  std::span<const double> sink;           // per cell, may be empty
};

struct AssemblyStats {
  int upwinded = 0;  // cell-directions where centred differences were replaced
};

/// Assembles the step operator on the pore unknowns of `g`.
///
/// The drift term uses centred differences unless that would produce a
/// positive off-diagonal entry, in which case the direction falls back to
/// one-sided differences taken downstream in w; the matrix is then an
/// M-matrix with row sums inv_dt + sink (without cross diffusion). Missing
/// neighbours act as mirror ghosts, which is the discrete no-flux condition.
inline SparseMatrix assemble_transport(const MaskedGrid& g, const TransportTerms& t, AssemblyStats* stats = nullptr) {
  const int n = g.n();
  const double h = g.h(), h2 = h * h;
  const Conductances& k = *t.conductance;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(g.pore_count()) * (k.with_cross ? 9 : 5));
  AssemblyStats st;

  auto face_k = [&](int i, int j, Side s) -> double {
    switch (s) {
      case Side::East: return k.kx[g.index(i, j)];
      case Side::West: return k.kx[g.index(i - 1, j)];
      case Side::North: return k.ky[g.index(i, j)];
      case Side::South: return k.ky[g.index(i, j - 1)];
    }
    return 0.0;
  };

  for (int c : g.pore_cells()) {
    const int row = g.unknown(c);
    const int i = g.ci(c), j = g.cj(c);
    double diag = t.inv_dt + (t.sink.empty() ? 0.0 : t.sink[c]);

    std::array<double, 4> off{};
    std::array<bool, 4> present{};
    for (int s = 0; s < 4; ++s) {
      const Side side = kSides[s];
      present[s] = g.is_pore(i + side_di(side), j + side_dj(side));
      if (present[s]) {
        const double kf = face_k(i, j, side) / h2;
        off[s] = -kf;
        diag += kf;
      }
    }

    if (t.velocity) {
      // pairs (East, West) and (North, South)
      const double wdir[2] = {t.velocity->x[c], t.velocity->y[c]};
      for (int d = 0; d < 2; ++d) {
        const int plus = 2 * d, minus = 2 * d + 1;
        const double w = wdir[d];
        if (w == 0.0) continue;
        double cp = 0.5 * w / h, cm = -0.5 * w / h;
        const bool ok_plus = !present[plus] || (-off[plus] + cp >= 0.0);
        const bool ok_minus = !present[minus] || (-off[minus] + cm >= 0.0);
        if (!(ok_plus && ok_minus)) {
          ++st.upwinded;
          cp = w > 0.0 ? w / h : 0.0;
          cm = w < 0.0 ? -w / h : 0.0;
        }
        if (present[plus]) {
          off[plus] -= cp;
          diag += cp;
        }
        if (present[minus]) {
          off[minus] -= cm;
          diag += cm;
        }
      }
    }

    trip.emplace_back(row, row, diag);
    for (int s = 0; s < 4; ++s) {
      if (!present[s]) continue;
      const Side side = kSides[s];
      trip.emplace_back(row, g.unknown(g.index(i + side_di(side), j + side_dj(side))), off[s]);
    }
  }

  if (k.with_cross) {
    // vertex form of -2 K12 d2/dxdy on vertices shared by four pore cells
    const double scale = k.cross / (4.0 * h2);
    const double gx[4] = {-1.0, 1.0, -1.0, 1.0};
    const double gy[4] = {-1.0, -1.0, 1.0, 1.0};
    for (int j = 0; j + 1 < n; ++j) {
      for (int i = 0; i + 1 < n; ++i) {
        const int cells[4] = {g.index(i, j), g.index(i + 1, j), g.index(i, j + 1), g.index(i + 1, j + 1)};
        bool all = true;
        for (int c : cells) all = all && g.is_pore(c);
        if (!all) continue;
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b)
            trip.emplace_back(g.unknown(cells[a]), g.unknown(cells[b]), scale * (gx[a] * gy[b] + gy[a] * gx[b]));
      }
    }
  }

  SparseMatrix m(g.pore_count(), g.pore_count());
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  if (stats) *stats = st;
  return m;
}

inline Vector gather(const MaskedGrid& g, std::span<const double> f) {
  Vector v(g.pore_count());
  for (int c : g.pore_cells()) v[g.unknown(c)] = f[c];
  return v;
}

inline void scatter(const MaskedGrid& g, const Vector& v, std::span<double> f) {
  for (int c : g.pore_cells()) f[c] = v[g.unknown(c)];
}

}  // namespace perihom
