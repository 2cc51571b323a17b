#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "perihom/grid.hpp"

namespace perihom {

class MollifierError : public Error {
 public:
  using Error::Error;
};

/// Discrete bump kernel J_delta on grid offsets.
///
/// The weight at offset s is proportional to exp(1 / (|s|^2 / delta^2 - 1))
/// inside the ball |s| < delta and the taps are normalised to sum to one.
class MollifierKernel {
 public:
  struct Tap {
    int di, dj;
    double weight;
  };

  MollifierKernel() = default;

  static MollifierKernel build(double delta, double grid_spacing) {
    if (!(grid_spacing > 0.0)) throw MollifierError("grid spacing must be positive");
    if (!(delta >= 2.0 * grid_spacing * (1.0 - 1e-12)))
      throw MollifierError("mollifier radius must be at least two grid spacings");
    MollifierKernel k;
    k.delta_ = delta;
    k.h_ = grid_spacing;
    k.radius_ = static_cast<int>(std::ceil(delta / grid_spacing));
    double sum = 0.0;
    for (int dj = -k.radius_; dj <= k.radius_; ++dj) {
      for (int di = -k.radius_; di <= k.radius_; ++di) {
        const double q = (di * di + dj * dj) * grid_spacing * grid_spacing / (delta * delta);
        if (q >= 1.0) continue;
        const double w = std::exp(1.0 / (q - 1.0) + 1.0);
        k.taps_.push_back({di, dj, w});
        sum += w;
      }
    }
    for (auto& t : k.taps_) t.weight /= sum;
    return k;
  }

  double delta() const noexcept { return delta_; }
  double grid_spacing() const noexcept { return h_; }
  int radius() const noexcept { return radius_; }
  const std::vector<Tap>& taps() const noexcept { return taps_; }

  double weight(int di, int dj) const {
    for (const auto& t : taps_)
      if (t.di == di && t.dj == dj) return t.weight;
    return 0.0;
  }

  double weight_sum() const {
    double s = 0.0;
    for (const auto& t : taps_) s += t.weight;
    return s;
  }

 private:
  double delta_ = 0.0;
  double h_ = 0.0;
  int radius_ = 0;
  std::vector<Tap> taps_;
};

struct VectorField {
  std::vector<double> x, y;

  VectorField() = default;
  explicit VectorField(std::size_t n) : x(n, 0.0), y(n, 0.0) {}
};

/// grad(J_delta * f) on the pore cells of `grid`.
///
/// The convolution is evaluated at the four neighbours of every pore cell,
/// including grain cells and ghost points outside the domain, with the taps
/// restricted to pore cells and renormalised. The field is taken relative to
/// an anchor value so constants map to an exactly zero gradient. Entries at
/// grain cells are left zero.
inline VectorField mollified_gradient(std::span<const double> field, const MollifierKernel& kernel,
                                      const MaskedGrid& grid) {
  const int n = grid.n();
  if (std::abs(kernel.grid_spacing() - grid.h()) > 1e-12 * grid.h())
    throw MollifierError("mollifier kernel built for a different grid spacing");
  VectorField out(static_cast<std::size_t>(grid.cell_count()));
  if (grid.pore_count() == 0) return out;
  const double anchor = field[grid.pore_cells().front()];

  // smoothed values on the grid extended by one ghost layer
  const int m = n + 2;
  std::vector<double> smooth(static_cast<std::size_t>(m) * m, 0.0);
  std::vector<std::uint8_t> done(smooth.size(), 0);
  auto smoothed = [&](int i, int j) -> double {
    const int e = (j + 1) * m + (i + 1);
    if (done[e]) return smooth[e];
    double num = 0.0, den = 0.0;
    for (const auto& t : kernel.taps()) {
      const int a = i + t.di, b = j + t.dj;
      if (!grid.is_pore(a, b)) continue;
      num += t.weight * (field[grid.index(a, b)] - anchor);
      den += t.weight;
    }
    if (den <= 0.0) throw MollifierError("mollifier stencil covers no pore cell");
    smooth[e] = anchor + num / den;
    done[e] = 1;
    return smooth[e];
  };

  const double inv2h = 0.5 / grid.h();
  for (int c : grid.pore_cells()) {
    const int i = grid.ci(c), j = grid.cj(c);
    out.x[c] = (smoothed(i + 1, j) - smoothed(i - 1, j)) * inv2h;
    out.y[c] = (smoothed(i, j + 1) - smoothed(i, j - 1)) * inv2h;
  }
  return out;
}

}  // namespace perihom
