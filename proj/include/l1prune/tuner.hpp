#pragma once

// Outer loop around the FISTA solver: solve, round to the target pattern,
// keep the best rounded candidate and move lambda by bisection according to
// how much of the error the rounding step introduced.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "l1prune/errors.hpp"
#include "l1prune/linalg.hpp"
#include "l1prune/solver.hpp"
#include "l1prune/sparsity.hpp"

namespace l1prune {

struct TunerConfig {
  double lambda_init = 1e-5;
  double lambda_lo = 0.0;
  double lambda_hi = 1e6;
  // Rounding-error share above which lambda is increased.
  double xi = 0.3;
  // Stop after this many non-improving outer iterations (T).
  std::size_t max_non_improving = 3;
  // Stop once the relative improvement of an accepted candidate drops below this.
  double epsilon = 1e-6;
  FistaSettings fista;
};

void validate(const TunerConfig& cfg);

enum class StopReason { non_improvement, epsilon, interval_collapse };

std::string_view to_string(StopReason reason);

struct LambdaTrial {
  double lambda = 0;
  double e_total = 0;
  double e_round = 0;
  bool accepted = false;
  std::size_t fista_iterations = 0;
};

template <typename Scalar>
struct OperatorPruneResult {
  Matrix<Scalar> weights;
  Scalar best_total_error = 0;
  // Total error of the rounded warm start, the baseline the loop must beat.
  Scalar initial_total_error = 0;
  std::vector<LambdaTrial> lambda_trace;
  std::size_t outer_iterations = 0;
  std::size_t inner_iterations = 0;
  StopReason stop_reason = StopReason::epsilon;
  std::vector<std::string> warnings;
};

template <typename Scalar>
struct ErrorSplit {
  Scalar total = 0;
  Scalar round = 0;
};

/// total = ||W_rounded X* - T||_F, round = total - ||W_unrounded X* - T||_F.
template <typename DR, typename DU, typename DX, typename DT>
ErrorSplit<typename DR::Scalar> compute_errors(const Eigen::MatrixBase<DR>& w_rounded,
                                               const Eigen::MatrixBase<DU>& w_unrounded,
                                               const Eigen::MatrixBase<DX>& xstar,
                                               const Eigen::MatrixBase<DT>& target) {
  require_same_shape(w_rounded, w_unrounded, "compute_errors");
  const auto total = reconstruction_error(w_rounded, xstar, target);
  const auto unrounded = reconstruction_error(w_unrounded, xstar, target);
  return {total, total - unrounded};
}

/// Bisection state for lambda. The interval only ever shrinks.
struct LambdaBracket {
  double lo = 0.0;
  double hi = 1e6;
  double lambda = 1e-5;
  // Upper bound the bracket started from; sets the collapse threshold.
  double initial_hi = 1e6;
};

struct BisectionStep {
  LambdaBracket bracket;
  // Width fell below 1e-12 * initial_hi.
  bool collapsed = false;
};

/// ratio > xi moves lambda up to the midpoint of [lambda, hi]; otherwise down
/// to the midpoint of [lo, lambda].
BisectionStep bisect_lambda(const LambdaBracket& bracket, double ratio, double xi);

/// Runs the solve/round/bisect loop for one linear operator.
///
/// `x` is the dense input (the target is w * x), `xstar` the input seen by the
/// pruned operator. The returned weights always satisfy `pattern`, and their
/// error never exceeds that of the rounded warm start.
template <typename DW, typename DXd, typename DXs, typename DS>
OperatorPruneResult<typename DW::Scalar> prune_operator(const Eigen::MatrixBase<DW>& w,
                                                        const Eigen::MatrixBase<DXd>& x,
                                                        const Eigen::MatrixBase<DXs>& xstar,
                                                        const SparsityPattern& pattern,
                                                        const Eigen::MatrixBase<DS>& warm_start,
                                                        const TunerConfig& cfg) {
  using Scalar = typename DW::Scalar;
  using Mat = Matrix<Scalar>;
  require_valid(w, "prune_operator weights");
  require_valid(x, "prune_operator dense input");
  require_valid(xstar, "prune_operator solver input");
  require_valid(warm_start, "prune_operator warm start");
  require_same_shape(w, warm_start, "prune_operator warm start");
  require_same_shape(x, xstar, "prune_operator inputs");
  validate(cfg);
  detail::check_applicable(pattern, w.cols());

  const Mat target = matmul(w, x);
  OperatorPruneResult<Scalar> result;

  Mat best;
  if (satisfies_pattern(warm_start, pattern)) {
    best = warm_start;
  } else {
    best = round_to_pattern(warm_start, pattern);
    result.warnings.push_back("warm start violated " + to_string(pattern) +
                              "; rounded before use");
  }
  Scalar e_best = reconstruction_error(best, xstar, target);
  result.initial_total_error = e_best;

  auto finish = [&](StopReason reason) {
    result.weights = std::move(best);
    result.best_total_error = e_best;
    result.stop_reason = reason;
    return std::move(result);
  };

  if (e_best == Scalar(0)) return finish(StopReason::epsilon);

  LambdaBracket bracket{cfg.lambda_lo, cfg.lambda_hi, cfg.lambda_init, cfg.lambda_hi};
  std::size_t non_improving = 0;
  Scalar e_stop = std::numeric_limits<Scalar>::infinity();

  for (;;) {
    const double lambda = bracket.lambda;
    FistaResult<Scalar> solved;
    try {
      solved = fista_run(target, xstar, Scalar(lambda), best, cfg.fista);
    } catch (const NumericalError& err) {
      throw NumericalError(std::string(err.what()) + " (lambda=" + std::to_string(lambda) + ")",
                           err.iteration());
    }
    Mat rounded = round_to_pattern(solved.weights, pattern);
    const auto errors = compute_errors(rounded, solved.weights, xstar, target);

    ++result.outer_iterations;
    result.inner_iterations += solved.iterations_used;
    const bool improved = errors.total < e_best;
    result.lambda_trace.push_back(LambdaTrial{lambda, double(errors.total), double(errors.round),
                                              improved, solved.iterations_used});

    if (improved) {
      best = std::move(rounded);
      e_stop = (e_best - errors.total) / e_best;
      e_best = errors.total;
      if (e_best == Scalar(0)) return finish(StopReason::epsilon);
    } else {
      ++non_improving;
    }

    double ratio = errors.total > Scalar(0) ? double(errors.round / errors.total) : 0.0;
    ratio = std::clamp(ratio, 0.0, 1.0);
    const auto step = bisect_lambda(bracket, ratio, cfg.xi);
    bracket = step.bracket;

    if (non_improving >= cfg.max_non_improving) return finish(StopReason::non_improvement);
    if (e_stop < Scalar(cfg.epsilon)) return finish(StopReason::epsilon);
    if (step.collapsed) return finish(StopReason::interval_collapse);
  }
}

}  // namespace l1prune
