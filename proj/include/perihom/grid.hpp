#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace perihom {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Linear or nonlinear solver failure. Carries the last residual seen.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

enum class Side : std::uint8_t { East, West, North, South };

inline constexpr Side kSides[4] = {Side::East, Side::West, Side::North, Side::South};

constexpr int side_di(Side s) { return s == Side::East ? 1 : (s == Side::West ? -1 : 0); }
constexpr int side_dj(Side s) { return s == Side::North ? 1 : (s == Side::South ? -1 : 0); }

/// Square cell-centred grid over (0, n*h)^2 with a pore mask.
///
/// Cell (i, j) has centre ((i + 0.5) h, (j + 0.5) h); flat index j * n + i.
/// Pore cells are numbered consecutively in flat-index order so linear
/// systems only carry pore unknowns.
class MaskedGrid {
 public:
  MaskedGrid() = default;

  MaskedGrid(int n, double h, std::vector<std::uint8_t> pore)
      : n_(n), h_(h), pore_(std::move(pore)), unknown_(pore_.size(), -1) {
    if (n <= 0 || static_cast<std::size_t>(n) * n != pore_.size())
      throw GeometryError("MaskedGrid: mask size does not match n*n");
    for (int c = 0; c < n_ * n_; ++c) {
      if (pore_[c]) {
        unknown_[c] = static_cast<int>(cells_.size());
        cells_.push_back(c);
      }
    }
  }

  /// Grid with every cell in the pore space (unit square, no perforation).
  static MaskedGrid full(int n) {
    return MaskedGrid(n, 1.0 / n, std::vector<std::uint8_t>(static_cast<std::size_t>(n) * n, 1));
  }

  int n() const noexcept { return n_; }
  double h() const noexcept { return h_; }
  int cell_count() const noexcept { return n_ * n_; }
  int pore_count() const noexcept { return static_cast<int>(cells_.size()); }

  int index(int i, int j) const noexcept { return j * n_ + i; }
  int ci(int c) const noexcept { return c % n_; }
  int cj(int c) const noexcept { return c / n_; }
  bool inside(int i, int j) const noexcept { return i >= 0 && j >= 0 && i < n_ && j < n_; }
  bool is_pore(int i, int j) const noexcept { return inside(i, j) && pore_[index(i, j)]; }
  bool is_pore(int c) const noexcept { return pore_[c] != 0; }

  double x(int i) const noexcept { return (i + 0.5) * h_; }
  double y(int j) const noexcept { return (j + 0.5) * h_; }

  /// Unknown number of a cell, -1 for grain cells.
  int unknown(int c) const noexcept { return unknown_[c]; }
  const std::vector<int>& pore_cells() const noexcept { return cells_; }
  const std::vector<std::uint8_t>& mask() const noexcept { return pore_; }

  double pore_area() const noexcept { return cells_.size() * h_ * h_; }

 private:
  int n_ = 0;
  double h_ = 0.0;
  std::vector<std::uint8_t> pore_;
  std::vector<int> unknown_;
  std::vector<int> cells_;
};

/// Discrete L2(pore) norm of a cell field.
inline double l2_norm(const MaskedGrid& g, std::span<const double> f) {
  double s = 0.0;
  for (int c : g.pore_cells()) s += f[c] * f[c];
  return std::sqrt(s * g.h() * g.h());
}

inline double l2_distance(const MaskedGrid& g, std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (int c : g.pore_cells()) s += (a[c] - b[c]) * (a[c] - b[c]);
  return std::sqrt(s * g.h() * g.h());
}

inline double integrate(const MaskedGrid& g, std::span<const double> f) {
  double s = 0.0;
  for (int c : g.pore_cells()) s += f[c];
  return s * g.h() * g.h();
}

/// Sum over pore cells of squared face differences / h^2, times face area h^2.
inline double gradient_norm_sq(const MaskedGrid& g, std::span<const double> f) {
  double s = 0.0;
  for (int c : g.pore_cells()) {
    const int i = g.ci(c), j = g.cj(c);
    if (g.is_pore(i + 1, j)) {
      const double d = f[g.index(i + 1, j)] - f[c];
      s += d * d;
    }
    if (g.is_pore(i, j + 1)) {
      const double d = f[g.index(i, j + 1)] - f[c];
      s += d * d;
    }
  }
  return s;
}

}  // namespace perihom
