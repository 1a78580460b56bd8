#pragma once

#include "prevcorr/types.hpp"

namespace prevcorr {

// First/second moment accumulators for Adam.
struct AdamState {
  Vec m, v;

  static AdamState zeros(Eigen::Index n) {
    return AdamState{Vec::Zero(n), Vec::Zero(n)};
  }
};

struct AdamConfig {
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Standard Adam update with bias correction; t is the 1-based step count.
void adam_step(AdamState& state, Vec& params, const Vec& grad, double lr,
               double beta1, double beta2, double eps, long t);

inline void adam_step(AdamState& state, Vec& params, const Vec& grad,
                      const AdamConfig& cfg, long t) {
  adam_step(state, params, grad, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps, t);
}

}  // namespace prevcorr
