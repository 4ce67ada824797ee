#pragma once

// Dense matrix primitives used by the pruning solver.
//
// Every routine accepts any Eigen dense expression and returns a plain
// row-major matrix. Reductions are sequential, so results depend only on the
// inputs and never on thread scheduling.

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "l1prune/errors.hpp"

namespace l1prune {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using MatrixD = Matrix<double>;

template <typename Derived>
using PlainOf = Matrix<typename Derived::Scalar>;

/// Throws ShapeError for an empty matrix and ParameterError for NaN/Inf entries.
template <typename Derived>
void require_valid(const Eigen::MatrixBase<Derived>& a, std::string_view name) {
  if (a.rows() == 0 || a.cols() == 0) {
    throw ShapeError(std::string(name) + ": matrix must have positive dimensions, got " +
                     std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
  if (!a.allFinite()) {
    throw ParameterError(std::string(name) + ": matrix contains non-finite entries");
  }
}

template <typename DA, typename DB>
void require_same_shape(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b,
                        std::string_view what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(what) + ": shape " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
  }
}

template <typename DA, typename DB>
PlainOf<DA> matmul(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions differ (" + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " times " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()) + ")");
  }
  PlainOf<DA> out = a * b;
  return out;
}

template <typename Derived>
typename Derived::RealScalar frobenius_norm(const Eigen::MatrixBase<Derived>& a) {
  using Real = typename Derived::RealScalar;
  // Evaluate once: coefficient access on a product expression recomputes it.
  const PlainOf<Derived> m = a;
  Real sum = 0;
  for (Eigen::Index i = 0; i < m.size(); ++i) sum += m.data()[i] * m.data()[i];
  return std::sqrt(sum);
}

template <typename Scalar>
struct LipschitzEstimate {
  Scalar value = 0;
  std::size_t iterations = 0;
  // False when max_iters ran out first; `value` is then the last Rayleigh quotient.
  bool converged = true;
};

/// Largest eigenvalue of X X^T, i.e. the squared spectral norm of X.
///
/// Power iteration on the smaller of the two Gram matrices (X X^T or X^T X,
/// which share their nonzero spectrum). Starts from the normalised all-ones
/// vector with a small deterministic perturbation and stops once the Rayleigh
/// quotient changes by at most `tol` relative. An all-zero X yields exactly 0.
template <typename Derived>
LipschitzEstimate<typename Derived::Scalar> lipschitz_constant(
    const Eigen::MatrixBase<Derived>& xstar, typename Derived::Scalar tol = 1e-6,
    std::size_t max_iters = 1000) {
  using Scalar = typename Derived::Scalar;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  require_valid(xstar, "lipschitz_constant");
  if (!(tol > 0)) throw ParameterError("lipschitz_constant: tol must be positive");

  if ((xstar.array() == Scalar(0)).all()) return {Scalar(0), 0, true};

  const bool tall = xstar.rows() > xstar.cols();
  const Matrix<Scalar> gram = tall ? Matrix<Scalar>(xstar.transpose() * xstar)
                                   : Matrix<Scalar>(xstar * xstar.transpose());
  const Eigen::Index d = gram.rows();

  Vector v(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    v(i) = Scalar(1) + Scalar(1e-3) * std::sin(Scalar(i + 1));
  }
  v.normalize();
  Scalar rayleigh = v.dot(gram * v);

  for (std::size_t it = 1; it <= max_iters; ++it) {
    Vector w = gram * v;
    const Scalar nrm = w.norm();
    if (nrm == Scalar(0)) {
      // Start vector fell in the null space; restart on the heaviest coordinate.
      Eigen::Index j = 0;
      gram.diagonal().maxCoeff(&j);
      v.setZero();
      v(j) = 1;
      rayleigh = gram(j, j);
      continue;
    }
    v = w / nrm;
    const Scalar next = v.dot(gram * v);
    if (std::abs(next - rayleigh) <= tol * std::abs(next)) return {next, it, true};
    rayleigh = next;
  }
  return {rayleigh, max_iters, false};
}

/// Elementwise proximal operator of rho * |x|.
template <typename Derived>
PlainOf<Derived> soft_shrinkage(const Eigen::MatrixBase<Derived>& a,
                                typename Derived::Scalar rho) {
  using Scalar = typename Derived::Scalar;
  if (!(rho >= Scalar(0)) || !std::isfinite(rho)) {
    throw ParameterError("soft_shrinkage: rho must be a finite non-negative value");
  }
  return a.unaryExpr([rho](Scalar x) -> Scalar {
    if (x > rho) return x - rho;
    if (x < -rho) return x + rho;
    return x == Scalar(0) ? x : Scalar(0);
  });
}

}  // namespace l1prune
