#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "perihom/grid.hpp"

namespace perihom {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

struct KrylovReport {
  int iterations = 0;
  double relative_residual = 0.0;
};

namespace detail {
inline void remove_mean(Vector& v) {
  if (v.size() > 0) v.array() -= v.mean();
}
}  // namespace detail

/// Jacobi-preconditioned conjugate gradients for a symmetric positive
/// semi-definite system whose nullspace is the constant vector.
///
/// The right-hand side and every iterate are projected onto mean zero, so
/// the returned solution is the zero-mean representative.
inline KrylovReport pcg_mean_zero(const SparseMatrix& a, const Vector& rhs, Vector& x, double tol,
                                  int max_iter) {
  const Eigen::Index n = rhs.size();
  Vector b = rhs;
  detail::remove_mean(b);
  x = Vector::Zero(n);
  KrylovReport rep;
  const double bnorm = b.norm();
  if (bnorm == 0.0) return rep;

  Vector inv_diag(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = a.coeff(i, i);
    if (!(d > 0.0)) throw SolverError("corrector system has a non-positive diagonal entry", 0.0);
    inv_diag[i] = 1.0 / d;
  }

  Vector r = b;
  Vector z = inv_diag.cwiseProduct(r);
  detail::remove_mean(z);
  Vector p = z;
  double rz = r.dot(z);
  Vector q(n);
  for (int it = 1; it <= max_iter; ++it) {
    q.noalias() = a * p;
    const double pq = p.dot(q);
    if (!(pq > 0.0))
      throw SolverError("corrector system is singular beyond the constant nullspace", r.norm() / bnorm);
    const double alpha = rz / pq;
    x += alpha * p;
    r -= alpha * q;
    detail::remove_mean(r);
    rep.iterations = it;
    rep.relative_residual = r.norm() / bnorm;
    if (rep.relative_residual < tol) {
      detail::remove_mean(x);
      // true residual guards against drift of the recursive one
      const double true_res = (b - a * x).norm() / bnorm;
      if (true_res < 10.0 * tol) {
        rep.relative_residual = true_res;
        return rep;
      }
      r = b - a * x;
      detail::remove_mean(r);
    }
    z = inv_diag.cwiseProduct(r);
    detail::remove_mean(z);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  throw SolverError("conjugate gradients did not converge within " + std::to_string(max_iter) +
                        " iterations (relative residual " + std::to_string(rep.relative_residual) + ")",
                    rep.relative_residual);
}

/// Sparse LU with the symbolic analysis reused while the pattern is unchanged.
class DirectSolver {
 public:
  explicit DirectSolver(double residual_tol = 1e-10) : tol_(residual_tol) {}

  DirectSolver(const DirectSolver&) = delete;
  DirectSolver& operator=(const DirectSolver&) = delete;

  Vector solve(const SparseMatrix& a, const Vector& b) {
    if (!same_pattern(a)) {
      lu_.analyzePattern(a);
      outer_.assign(a.outerIndexPtr(), a.outerIndexPtr() + a.outerSize() + 1);
      inner_.assign(a.innerIndexPtr(), a.innerIndexPtr() + a.nonZeros());
    }
    lu_.factorize(a);
    if (lu_.info() != Eigen::Success) throw SolverError("sparse LU factorisation failed: " + lu_.lastErrorMessage(), 0.0);
    Vector x = lu_.solve(b);
    const double bn = b.norm();
    const double res = bn > 0.0 ? (a * x - b).norm() / bn : (a * x).norm();
    if (!(res < tol_)) throw SolverError("linear solve residual " + std::to_string(res) + " above tolerance", res);
    last_residual_ = res;
    return x;
  }

  double last_residual() const noexcept { return last_residual_; }

 private:
  bool same_pattern(const SparseMatrix& a) const {
    if (outer_.size() != static_cast<std::size_t>(a.outerSize() + 1) ||
        inner_.size() != static_cast<std::size_t>(a.nonZeros()))
      return false;
    for (std::size_t k = 0; k < outer_.size(); ++k)
      if (outer_[k] != a.outerIndexPtr()[k]) return false;
    for (std::size_t k = 0; k < inner_.size(); ++k)
      if (inner_[k] != a.innerIndexPtr()[k]) return false;
    return true;
  }

  double tol_;
  double last_residual_ = 0.0;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<int> outer_, inner_;
};

}  // namespace perihom
