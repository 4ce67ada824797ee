#pragma once

// Accelerated proximal gradient (FISTA) for the l1-regularised reconstruction
// problem
//
//     min_W  1/2 ||W X* - T||_F^2 + lambda * sum_ij |W_ij|,
//
// where T = W_dense X is the dense operator's output and X* is the input the
// pruned operator actually sees. Also provides a coordinate-descent reference
// solver and a subgradient optimality residual used to certify solutions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "l1prune/errors.hpp"
#include "l1prune/linalg.hpp"

namespace l1prune {

struct FistaSettings {
  std::size_t max_iters = 20;
  // Stop once successive extrapolated iterates are closer than this in
  // Frobenius norm. Zero disables the test.
  double stop_tol = 1e-6;
  bool deterministic = true;
  // Power-iteration controls for the step size 1/L.
  double lipschitz_tol = 1e-10;
  std::size_t lipschitz_max_iters = 1000;
};

template <typename Scalar>
struct FistaResult {
  Matrix<Scalar> weights;
  std::size_t iterations_used = 0;
  // Objective value of the proximal iterate after each iteration.
  std::vector<Scalar> objective_trace;
  bool converged_by_tol = false;
  Scalar lipschitz = 0;
  bool lipschitz_converged = true;
};

namespace detail {

template <typename DW, typename DX, typename DT>
void check_problem_shapes(const Eigen::MatrixBase<DW>& w, const Eigen::MatrixBase<DX>& xstar,
                          const Eigen::MatrixBase<DT>& target, const char* where) {
  if (w.cols() != xstar.rows() || target.rows() != w.rows() || target.cols() != xstar.cols()) {
    throw ShapeError(std::string(where) + ": weights " + std::to_string(w.rows()) + "x" +
                     std::to_string(w.cols()) + ", activations " + std::to_string(xstar.rows()) +
                     "x" + std::to_string(xstar.cols()) + ", target " +
                     std::to_string(target.rows()) + "x" + std::to_string(target.cols()) +
                     " are inconsistent");
  }
}

template <typename Scalar>
void check_lambda(Scalar lambda, const char* where) {
  if (!(lambda >= Scalar(0)) || !std::isfinite(lambda)) {
    throw ParameterError(std::string(where) + ": lambda must be finite and non-negative");
  }
}

}  // namespace detail

/// ||W X* - T||_F
template <typename DW, typename DX, typename DT>
typename DW::Scalar reconstruction_error(const Eigen::MatrixBase<DW>& w,
                                         const Eigen::MatrixBase<DX>& xstar,
                                         const Eigen::MatrixBase<DT>& target) {
  detail::check_problem_shapes(w, xstar, target, "reconstruction_error");
  return frobenius_norm(w * xstar - target);
}

/// 1/2 ||W X* - T||_F^2 + lambda ||W||_1 (entrywise l1, i.e. the sum of row l1 norms).
template <typename DW, typename DX, typename DT>
typename DW::Scalar objective(const Eigen::MatrixBase<DW>& wstar,
                              const Eigen::MatrixBase<DX>& xstar,
                              const Eigen::MatrixBase<DT>& target, typename DW::Scalar lambda) {
  using Scalar = typename DW::Scalar;
  detail::check_problem_shapes(wstar, xstar, target, "objective");
  detail::check_lambda(lambda, "objective");
  const Scalar fit = frobenius_norm(wstar * xstar - target);
  return Scalar(0.5) * fit * fit + lambda * wstar.cwiseAbs().sum();
}

/// t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2
template <typename Scalar>
Scalar next_momentum(Scalar t) {
  return Scalar(0.5) * (Scalar(1) + std::sqrt(Scalar(1) + Scalar(4) * t * t));
}

template <typename DT, typename DX, typename DW>
FistaResult<typename DT::Scalar> fista_run(const Eigen::MatrixBase<DT>& target,
                                           const Eigen::MatrixBase<DX>& xstar,
                                           typename DT::Scalar lambda,
                                           const Eigen::MatrixBase<DW>& warm_start,
                                           const FistaSettings& settings = {}) {
  using Scalar = typename DT::Scalar;
  using Mat = Matrix<Scalar>;
  detail::check_problem_shapes(warm_start, xstar, target, "fista_run");
  detail::check_lambda(lambda, "fista_run");
  if (settings.max_iters < 1) throw ParameterError("fista_run: max_iters must be at least 1");
  if (!(settings.stop_tol >= 0)) throw ParameterError("fista_run: stop_tol must be >= 0");

  FistaResult<Scalar> result;
  const auto lip = lipschitz_constant(xstar, Scalar(settings.lipschitz_tol),
                                      settings.lipschitz_max_iters);
  result.lipschitz = lip.value;
  result.lipschitz_converged = lip.converged;
  if (!std::isfinite(lip.value)) {
    throw NumericalError("fista_run: Lipschitz constant overflowed", 0);
  }
  if (lip.value == Scalar(0)) {
    // With X* = 0 the fit term is constant and the l1 term is minimised at 0.
    result.weights = Mat::Zero(warm_start.rows(), warm_start.cols());
    result.converged_by_tol = true;
    return result;
  }

  const Scalar step = Scalar(1) / lip.value;
  const Mat gram = xstar * xstar.transpose();
  const Mat cross = target * xstar.transpose();

  Mat prox_prev = warm_start;
  Mat extrapolated = warm_start;
  Scalar t = 1;
  result.objective_trace.reserve(settings.max_iters);

  for (std::size_t k = 1; k <= settings.max_iters; ++k) {
    const Mat gradient = extrapolated * gram - cross;
    Mat prox = soft_shrinkage(extrapolated - step * gradient, lambda * step);
    const Scalar t_next = next_momentum(t);
    Mat next = prox + ((t - Scalar(1)) / t_next) * (prox - prox_prev);
    if (!prox.allFinite() || !next.allFinite()) {
      throw NumericalError("fista_run: non-finite iterate at iteration " + std::to_string(k), k);
    }
    result.objective_trace.push_back(objective(prox, xstar, target, lambda));
    const Scalar moved = frobenius_norm(next - extrapolated);
    prox_prev = std::move(prox);
    extrapolated = std::move(next);
    t = t_next;
    result.iterations_used = k;
    if (moved < Scalar(settings.stop_tol)) {
      result.converged_by_tol = true;
      break;
    }
  }
  result.weights = std::move(prox_prev);
  return result;
}

/// Cyclic coordinate descent on the same objective, run row by row until the
/// largest coordinate change in a sweep falls below `tol`. Slow but
/// independent of the FISTA code path; used to certify its output.
template <typename DT, typename DX>
Matrix<typename DT::Scalar> lasso_oracle(const Eigen::MatrixBase<DT>& target,
                                         const Eigen::MatrixBase<DX>& xstar,
                                         typename DT::Scalar lambda,
                                         typename DT::Scalar tol = 1e-12,
                                         std::size_t max_sweeps = 2'000'000) {
  using Scalar = typename DT::Scalar;
  using Mat = Matrix<Scalar>;
  if (target.cols() != xstar.cols()) {
    throw ShapeError("lasso_oracle: target and activations have different column counts");
  }
  detail::check_lambda(lambda, "lasso_oracle");
  if (!(tol > 0)) throw ParameterError("lasso_oracle: tol must be positive");

  const Mat gram = xstar * xstar.transpose();
  const Mat cross = target * xstar.transpose();
  const Eigen::Index n = gram.rows();
  Mat w = Mat::Zero(target.rows(), n);

  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    std::size_t sweep = 0;
    for (;; ++sweep) {
      if (sweep == max_sweeps) {
        throw OracleError("lasso_oracle: row " + std::to_string(i) + " not converged after " +
                          std::to_string(max_sweeps) + " sweeps");
      }
      Scalar largest_change = 0;
      for (Eigen::Index j = 0; j < n; ++j) {
        const Scalar curvature = gram(j, j);
        Scalar updated = 0;
        if (curvature > Scalar(0)) {
          const Scalar rho = cross(i, j) - w.row(i).dot(gram.row(j)) + curvature * w(i, j);
          if (rho > lambda) {
            updated = (rho - lambda) / curvature;
          } else if (rho < -lambda) {
            updated = (rho + lambda) / curvature;
          }
        }
        largest_change = std::max(largest_change, std::abs(updated - w(i, j)));
        w(i, j) = updated;
      }
      if (largest_change < tol) break;
    }
  }
  return w;
}

/// Largest violation of the subgradient optimality conditions:
/// |g_ij + lambda sign(w_ij)| on the support and max(|g_ij| - lambda, 0) off
/// it, with g = (W X* - T) X*^T.
template <typename DW, typename DX, typename DT>
typename DW::Scalar kkt_residual(const Eigen::MatrixBase<DW>& wstar,
                                 const Eigen::MatrixBase<DX>& xstar,
                                 const Eigen::MatrixBase<DT>& target,
                                 typename DW::Scalar lambda) {
  using Scalar = typename DW::Scalar;
  detail::check_problem_shapes(wstar, xstar, target, "kkt_residual");
  const Matrix<Scalar> grad = (wstar * xstar - target) * xstar.transpose();
  Scalar worst = 0;
  for (Eigen::Index i = 0; i < grad.rows(); ++i) {
    for (Eigen::Index j = 0; j < grad.cols(); ++j) {
      const Scalar w = wstar(i, j);
      const Scalar g = grad(i, j);
      const Scalar violation = w > Scalar(0)   ? std::abs(g + lambda)
                               : w < Scalar(0) ? std::abs(g - lambda)
                                               : std::max(std::abs(g) - lambda, Scalar(0));
      worst = std::max(worst, violation);
    }
  }
  return worst;
}

}  // namespace l1prune
