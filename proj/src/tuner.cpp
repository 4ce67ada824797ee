#include "l1prune/tuner.hpp"

namespace l1prune {

void validate(const TunerConfig& cfg) {
  if (!(cfg.lambda_lo >= 0.0 && cfg.lambda_lo < cfg.lambda_init &&
        cfg.lambda_init < cfg.lambda_hi && std::isfinite(cfg.lambda_hi))) {
    throw ParameterError("tuner: need 0 <= lambda_lo < lambda_init < lambda_hi < inf");
  }
  if (!(cfg.xi > 0.0 && cfg.xi < 1.0)) throw ParameterError("tuner: xi must lie in (0, 1)");
  if (cfg.max_non_improving < 1) throw ParameterError("tuner: T must be at least 1");
  if (!(cfg.epsilon >= 0.0)) throw ParameterError("tuner: epsilon must be non-negative");
  if (cfg.fista.max_iters < 1) throw ParameterError("tuner: K must be at least 1");
  if (!(cfg.fista.stop_tol >= 0.0)) throw ParameterError("tuner: FISTA stop_tol must be >= 0");
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::non_improvement:
      return "non_improvement";
    case StopReason::epsilon:
      return "epsilon";
    case StopReason::interval_collapse:
      return "interval_collapse";
  }
  return "unknown";
}

BisectionStep bisect_lambda(const LambdaBracket& bracket, double ratio, double xi) {
  if (!(bracket.lo <= bracket.lambda && bracket.lambda <= bracket.hi)) {
    throw ParameterError("bisect_lambda: lambda outside its bracket");
  }
  if (!std::isfinite(ratio)) throw ParameterError("bisect_lambda: ratio must be finite");
  BisectionStep step{bracket, false};
  auto& b = step.bracket;
  if (ratio > xi) {
    b.lo = bracket.lambda;
    b.lambda = 0.5 * (bracket.lambda + bracket.hi);
  } else {
    b.hi = bracket.lambda;
    b.lambda = 0.5 * (bracket.lo + bracket.lambda);
  }
  step.collapsed = (b.hi - b.lo) < 1e-12 * bracket.initial_hi;
  return step;
}

}  // namespace l1prune
