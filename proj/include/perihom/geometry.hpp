#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <queue>
#include <string>
#include <variant>
#include <vector>

#include "perihom/grid.hpp"

namespace perihom {

struct NoGrain {};

struct Disc {
  std::array<double, 2> center{0.5, 0.5};
  double radius = 0.25;
};

/// Axis-aligned grain [x0, x1] x [y0, y1] inside the unit cell.
struct Rectangle {
  double x0 = 0.25, x1 = 0.75, y0 = 0.25, y1 = 0.75;
};

using GrainShape = std::variant<NoGrain, Disc, Rectangle>;

enum class BoundaryClass : std::uint8_t { Neumann, Robin };

struct CellMeasures {
  double pore_area = 1.0;        // |Y1|
  double perimeter = 0.0;        // |Gamma|
  double robin_perimeter = 0.0;  // |Gamma_R|
  double staircase_length = 0.0;

  double grain_area() const { return 1.0 - pore_area; }
  double neumann_perimeter() const { return perimeter - robin_perimeter; }
};

/// Face between a pore cell and a grain cell.
///
/// `measure` is the corrected interface length carried by the face, so the
/// face measures of one class add up to |Gamma_R| or |Gamma_N|.
struct BoundaryFace {
  int cell = 0;  // flat index of the pore cell
  Side side = Side::East;
  BoundaryClass cls = BoundaryClass::Robin;
  double measure = 0.0;
  std::array<double, 2> midpoint{};
};

struct UnitCell {
  int resolution = 0;
  GrainShape shape;
  double robin_fraction = 1.0;
  double robin_angle = 0.0;
  MaskedGrid grid;  // cell side 1, h = 1 / resolution
  CellMeasures measures;
  std::vector<BoundaryFace> faces;

  double h() const { return grid.h(); }
  bool has_grain() const { return !std::holds_alternative<NoGrain>(shape); }

  /// Periodic pore test.
  bool is_pore_periodic(int i, int j) const {
    const int n = resolution;
    i = ((i % n) + n) % n;
    j = ((j % n) + n) % n;
    return grid.is_pore(i, j);
  }
};

namespace detail {

inline bool inside_grain(const GrainShape& shape, double x, double y) {
  if (const auto* d = std::get_if<Disc>(&shape)) {
    const double dx = x - d->center[0], dy = y - d->center[1];
    return dx * dx + dy * dy < d->radius * d->radius;
  }
  if (const auto* r = std::get_if<Rectangle>(&shape))
    return x > r->x0 && x < r->x1 && y > r->y0 && y < r->y1;
  return false;
}

/// Signed level set, negative inside the grain.
inline double level_set(const GrainShape& shape, double x, double y) {
  if (const auto* d = std::get_if<Disc>(&shape))
    return std::hypot(x - d->center[0], y - d->center[1]) - d->radius;
  if (const auto* r = std::get_if<Rectangle>(&shape)) {
    const double cx = 0.5 * (r->x0 + r->x1), cy = 0.5 * (r->y0 + r->y1);
    const double qx = std::abs(x - cx) - 0.5 * (r->x1 - r->x0);
    const double qy = std::abs(y - cy) - 0.5 * (r->y1 - r->y0);
    const double outside = std::hypot(std::max(qx, 0.0), std::max(qy, 0.0));
    return outside + std::min(std::max(qx, qy), 0.0);
  }
  return 1.0;
}

inline std::array<double, 2> grain_centroid(const GrainShape& shape) {
  if (const auto* d = std::get_if<Disc>(&shape)) return d->center;
  if (const auto* r = std::get_if<Rectangle>(&shape))
    return {0.5 * (r->x0 + r->x1), 0.5 * (r->y0 + r->y1)};
  return {0.5, 0.5};
}

inline bool in_robin_sector(double angle, double reference, double fraction) {
  if (fraction >= 1.0) return true;
  if (fraction <= 0.0) return false;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double rel = std::fmod(angle - reference, two_pi);
  if (rel < 0.0) rel += two_pi;
  return rel < fraction * two_pi;
}

struct Segment {
  double length;
  std::array<double, 2> mid;
};

/// Marching squares on the level set sampled at grid nodes.
inline std::vector<Segment> interface_segments(const GrainShape& shape, int n) {
  const double h = 1.0 / n;
  std::vector<double> phi(static_cast<std::size_t>(n + 1) * (n + 1));
  for (int b = 0; b <= n; ++b)
    for (int a = 0; a <= n; ++a) phi[b * (n + 1) + a] = level_set(shape, a * h, b * h);

  std::vector<Segment> out;
  auto node = [&](int a, int b) { return phi[b * (n + 1) + a]; };
  for (int b = 0; b < n; ++b) {
    for (int a = 0; a < n; ++a) {
      // corners counter-clockwise from (a, b)
      const std::array<std::array<double, 2>, 4> p{{{a * h, b * h},
                                                    {(a + 1) * h, b * h},
                                                    {(a + 1) * h, (b + 1) * h},
                                                    {a * h, (b + 1) * h}}};
      const std::array<double, 4> v{node(a, b), node(a + 1, b), node(a + 1, b + 1), node(a, b + 1)};
      std::array<std::array<double, 2>, 4> cross{};
      std::array<bool, 4> has{};
      int count = 0;
      for (int e = 0; e < 4; ++e) {
        const int k = (e + 1) % 4;
        if ((v[e] < 0.0) != (v[k] < 0.0)) {
          const double t = v[e] / (v[e] - v[k]);
          cross[e] = {p[e][0] + t * (p[k][0] - p[e][0]), p[e][1] + t * (p[k][1] - p[e][1])};
          has[e] = true;
          ++count;
        }
      }
      auto emit = [&](int e0, int e1) {
        const double dx = cross[e1][0] - cross[e0][0], dy = cross[e1][1] - cross[e0][1];
        out.push_back({std::hypot(dx, dy),
                       {0.5 * (cross[e0][0] + cross[e1][0]), 0.5 * (cross[e0][1] + cross[e1][1])}});
      };
      if (count == 2) {
        int e0 = -1, e1 = -1;
        for (int e = 0; e < 4; ++e)
          if (has[e]) (e0 < 0 ? e0 : e1) = e;
        emit(e0, e1);
      } else if (count == 4) {
        // saddle: the centre value decides which corners are joined
        const bool centre_in = 0.25 * (v[0] + v[1] + v[2] + v[3]) < 0.0;
        if (centre_in == (v[0] < 0.0)) {
          emit(0, 1);
          emit(2, 3);
        } else {
          emit(3, 0);
          emit(1, 2);
        }
      }
    }
  }
  return out;
}

inline bool pore_connected(const UnitCell& cell) {
  const auto& g = cell.grid;
  if (g.pore_count() == 0) return false;
  std::vector<std::uint8_t> seen(g.cell_count(), 0);
  std::queue<int> q;
  q.push(g.pore_cells().front());
  seen[g.pore_cells().front()] = 1;
  int reached = 1;
  const int n = g.n();
  while (!q.empty()) {
    const int c = q.front();
    q.pop();
    for (Side s : kSides) {
      const int i = ((g.ci(c) + side_di(s)) % n + n) % n;
      const int j = ((g.cj(c) + side_dj(s)) % n + n) % n;
      const int nb = g.index(i, j);
      if (g.is_pore(nb) && !seen[nb]) {
        seen[nb] = 1;
        ++reached;
        q.push(nb);
      }
    }
  }
  return reached == g.pore_count();
}

inline void check_shape(const GrainShape& shape) {
  if (const auto* d = std::get_if<Disc>(&shape)) {
    if (!(d->radius > 0.0 && d->radius < 0.5))
      throw GeometryError("disc radius must lie in (0, 0.5)");
    for (double c : d->center)
      if (c - d->radius <= 0.0 || c + d->radius >= 1.0)
        throw GeometryError("disc grain touches the unit cell boundary");
  } else if (const auto* r = std::get_if<Rectangle>(&shape)) {
    if (!(r->x0 < r->x1 && r->y0 < r->y1))
      throw GeometryError("rectangle grain bounds are empty");
    if (r->x0 <= 0.0 || r->y0 <= 0.0 || r->x1 >= 1.0 || r->y1 >= 1.0)
      throw GeometryError("rectangle grain touches the unit cell boundary");
  }
}

}  // namespace detail

/// Builds the reference cell Y: pore mask by cell-centre sampling, |Y1| by
/// cell counting, |Gamma| by marching squares on the grain level set.
///
/// Staircase faces inherit a uniform length correction |Gamma| / (staircase
/// length), so face measures integrate to the marching-squares perimeter.
/// Gamma_R is the set of faces whose midpoint lies in the angular sector
/// [robin_angle, robin_angle + 2 pi robin_fraction) about the grain centroid.
inline UnitCell build_unit_cell(const GrainShape& shape, int resolution, double robin_fraction = 1.0,
                                double robin_angle = 0.0) {
  if (resolution < 16) throw GeometryError("unit cell resolution must be at least 16");
  if (!(robin_fraction >= 0.0 && robin_fraction <= 1.0))
    throw GeometryError("robin_fraction must lie in [0, 1]");
  detail::check_shape(shape);

  const int n = resolution;
  const double h = 1.0 / n;
  std::vector<std::uint8_t> pore(static_cast<std::size_t>(n) * n, 1);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (detail::inside_grain(shape, (i + 0.5) * h, (j + 0.5) * h)) pore[j * n + i] = 0;

  for (int k = 0; k < n; ++k) {
    if (!pore[k] || !pore[(n - 1) * n + k] || !pore[k * n] || !pore[k * n + n - 1])
      throw GeometryError("grain mask touches the unit cell boundary at this resolution");
  }

  UnitCell cell;
  cell.resolution = n;
  cell.shape = shape;
  cell.robin_fraction = robin_fraction;
  cell.robin_angle = robin_angle;
  cell.grid = MaskedGrid(n, h, std::move(pore));
  if (!detail::pore_connected(cell)) throw GeometryError("pore space of the unit cell is not connected");

  cell.measures.pore_area = cell.grid.pore_area();
  if (!cell.has_grain()) return cell;

  for (const auto& seg : detail::interface_segments(shape, n)) cell.measures.perimeter += seg.length;

  const auto centroid = detail::grain_centroid(shape);
  const auto& g = cell.grid;
  for (int c : g.pore_cells()) {
    const int i = g.ci(c), j = g.cj(c);
    for (Side s : kSides) {
      const int ni = i + side_di(s), nj = j + side_dj(s);
      if (!g.inside(ni, nj) || g.is_pore(ni, nj)) continue;
      BoundaryFace f;
      f.cell = c;
      f.side = s;
      f.midpoint = {g.x(i) + 0.5 * h * side_di(s), g.y(j) + 0.5 * h * side_dj(s)};
      const double angle = std::atan2(f.midpoint[1] - centroid[1], f.midpoint[0] - centroid[0]);
      f.cls = detail::in_robin_sector(angle, robin_angle, robin_fraction) ? BoundaryClass::Robin
                                                                          : BoundaryClass::Neumann;
      f.measure = h;
      cell.faces.push_back(f);
      cell.measures.staircase_length += h;
    }
  }
  const double correction = cell.measures.perimeter / cell.measures.staircase_length;
  double robin = 0.0, total = 0.0;
  for (auto& f : cell.faces) {
    f.measure *= correction;
    total += f.measure;
    if (f.cls == BoundaryClass::Robin) robin += f.measure;
  }
  cell.measures.perimeter = total;
  cell.measures.robin_perimeter = robin;
  return cell;
}

/// Point reflection of the cell about (1/2, 1/2); the Robin sector rotates along.
inline UnitCell reflect(const UnitCell& cell) {
  GrainShape shape = cell.shape;
  if (auto* d = std::get_if<Disc>(&shape)) {
    d->center = {1.0 - d->center[0], 1.0 - d->center[1]};
  } else if (auto* r = std::get_if<Rectangle>(&shape)) {
    *r = Rectangle{1.0 - r->x1, 1.0 - r->x0, 1.0 - r->y1, 1.0 - r->y0};
  }
  return build_unit_cell(shape, cell.resolution, cell.robin_fraction, cell.robin_angle + std::numbers::pi);
}

/// Omega^eps: the unit square tiled by ell x ell scaled copies of the cell.
struct PerforatedDomain {
  UnitCell cell;
  int periods = 1;  // ell
  double epsilon = 1.0;
  MaskedGrid grid;
  std::vector<BoundaryFace> faces;  // measures in Omega units

  /// Flat index of the unit-cell grid cell a domain cell maps to.
  int cell_of(int c) const {
    const int n = grid.n(), r = cell.resolution;
    return ((c / n) % r) * r + (c % n) % r;
  }

  double boundary_length() const {
    double s = 0.0;
    for (const auto& f : faces) s += f.measure;
    return s;
  }
  double robin_length() const {
    double s = 0.0;
    for (const auto& f : faces)
      if (f.cls == BoundaryClass::Robin) s += f.measure;
    return s;
  }
};

inline int periods_of(double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw GeometryError("epsilon must lie in (0, 1]");
  const double inv = 1.0 / epsilon;
  const long ell = std::lround(inv);
  if (ell < 1 || std::abs(inv - static_cast<double>(ell)) > 1e-9 * inv)
    throw GeometryError("1/epsilon must be an integer for an exact periodic tiling");
  return static_cast<int>(ell);
}

inline PerforatedDomain tile_domain(const UnitCell& cell, double epsilon, int max_cells_per_side = 4096) {
  const int ell = periods_of(epsilon);
  const int r = cell.resolution;
  const long n_long = static_cast<long>(ell) * r;
  if (n_long > max_cells_per_side) throw GeometryError("tiled grid exceeds the grid budget");
  const int n = static_cast<int>(n_long);

  std::vector<std::uint8_t> pore(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) pore[j * n + i] = cell.grid.mask()[(j % r) * r + (i % r)];

  PerforatedDomain dom;
  dom.cell = cell;
  dom.periods = ell;
  dom.epsilon = 1.0 / ell;
  dom.grid = MaskedGrid(n, 1.0 / n, std::move(pore));
  dom.faces.reserve(cell.faces.size() * ell * ell);
  for (int q = 0; q < ell; ++q) {
    for (int p = 0; p < ell; ++p) {
      for (const auto& f : cell.faces) {
        BoundaryFace g = f;
        const int ci = cell.grid.ci(f.cell) + p * r, cj = cell.grid.cj(f.cell) + q * r;
        g.cell = cj * n + ci;
        g.measure = f.measure * dom.epsilon;
        g.midpoint = {(p + f.midpoint[0]) * dom.epsilon, (q + f.midpoint[1]) * dom.epsilon};
        dom.faces.push_back(g);
      }
    }
  }
  return dom;
}

/// Unperforated unit square on an n x n grid (the macroscopic domain).
inline PerforatedDomain plain_domain(int n) {
  PerforatedDomain dom;
  dom.cell.resolution = n;
  dom.cell.grid = MaskedGrid::full(n);
  dom.grid = MaskedGrid::full(n);
  return dom;
}

}  // namespace perihom
