#pragma once

// Optional bounded residual on top of the Delta score, and the held-out
// evidence target and weighted Huber loss used to fit such residuals.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "arbiter/delta.hpp"
#include "arbiter/error.hpp"

namespace arbiter {

struct ResidualConfig {
  double lambda = 0.0;  // 0 disables the residual
  double c_clip = 1.0;
  bool use_permission = true;
};

struct ResidualInput {
  double e = 0.0;      // signed residual
  double gamma = 1.0;  // permission score in [0,1]
};

// score' = score + lambda * gamma * clip(e, -c_clip, c_clip); the change is
// at most lambda * c_clip in magnitude.
inline DeltaDecision delta_enc(const DeltaDecision& base, const ResidualInput& in, const ResidualConfig& cfg) {
  if (!(in.gamma >= 0.0 && in.gamma <= 1.0)) {
    throw Error("residual permission gamma must lie in [0,1], got " + std::to_string(in.gamma));
  }
  if (!(cfg.lambda >= 0.0)) throw Error("residual lambda must be >= 0");
  if (!(cfg.c_clip > 0.0)) throw Error("residual c_clip must be > 0");
  if (cfg.lambda == 0.0) return base;
  const double gamma = cfg.use_permission ? in.gamma : 1.0;
  DeltaDecision out = base;
  out.residual_term = cfg.lambda * gamma * std::clamp(in.e, -cfg.c_clip, cfg.c_clip);
  out.score = base.score + out.residual_term;
  out.override = out.score > 0.0;
  out.selected_rank = out.override ? out.challenger_rank : 1;
  return out;
}

// delta_{o,r} = ln((n_{o,r} + alpha) / (n_{o,1} + alpha)).
inline double heldout_target(int challenger_count, int dominant_count, double alpha = 1.0) {
  if (challenger_count < 0 || dominant_count < 0) throw Error("held-out counts must be >= 0");
  return std::log((challenger_count + alpha) / (dominant_count + alpha));
}

inline double huber(double residual, double transition) {
  const double a = std::abs(residual);
  if (a <= transition) return 0.5 * a * a;
  return transition * (a - 0.5 * transition);
}

struct ResidualExample {
  double prediction = 0.0;  // e
  double target = 0.0;      // held-out delta
  double weight = 1.0;      // held-out top-pair mass
};

inline double residual_loss(std::span<const ResidualExample> examples, double huber_delta = 1.0) {
  if (!(huber_delta > 0.0)) throw Error("huber transition must be > 0");
  double total = 0.0;
  for (const auto& ex : examples) {
    if (!(ex.weight >= 0.0 && ex.weight <= 1.0)) throw Error("loss weight must lie in [0,1]");
    total += ex.weight * huber(ex.prediction - ex.target, huber_delta);
  }
  return total;
}

}  // namespace arbiter
