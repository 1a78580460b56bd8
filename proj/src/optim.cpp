#include "prevcorr/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace prevcorr {

void adam_step(AdamState& state, Vec& params, const Vec& grad, double lr,
               double beta1, double beta2, double eps, long t) {
  if (t < 1) throw std::invalid_argument("adam_step: step count must be >= 1");
  if (state.m.size() != params.size() || state.v.size() != params.size() ||
      grad.size() != params.size())
    throw std::invalid_argument("adam_step: size mismatch");
  state.m = beta1 * state.m + (1.0 - beta1) * grad;
  state.v = beta2 * state.v.array().matrix() +
            (1.0 - beta2) * grad.array().square().matrix();
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace prevcorr
