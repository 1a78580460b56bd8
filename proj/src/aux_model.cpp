#include "prevcorr/aux_model.hpp"

#include <cmath>
#include <stdexcept>

namespace prevcorr {

void AuxSpec::validate() const {
  labels.validate();
  if (kind == AuxKind::Affine && main_dim < 1)
    throw std::invalid_argument("aux: affine kind requires main_dim >= 1");
  if (lr_bias <= 0.0 || lr_offset <= 0.0 || lr_matrix <= 0.0)
    throw std::invalid_argument("aux: learning rates must be positive");
  if (sparsity_strength < 0.0)
    throw std::invalid_argument("aux: sparsity strength must be >= 0");
}

AuxParams aux_init(const AuxSpec& spec, const Vec& w0, const LabelDist& p_y) {
  spec.validate();
  p_y.validate();
  if (!p_y.strictly_positive())
    throw std::invalid_argument("aux: initial prevalence must be positive");
  AuxParams psi;
  const Vec warm = p_y.log();
  if (spec.kind == AuxKind::Constant) {
    psi.logits = warm;
  } else {
    if (w0.size() != spec.main_dim)
      throw std::invalid_argument("aux: w0 dimension mismatch");
    psi.weight = Mat::Zero(spec.main_dim, spec.n_labels());
    psi.offset = w0;
    psi.bias = warm;
  }
  return psi;
}

namespace {

Vec aux_logits(const AuxSpec& spec, const AuxParams& psi, const Vec& w) {
  if (spec.kind == AuxKind::Constant) return psi.logits;
  if (w.size() != spec.main_dim)
    throw std::invalid_argument("aux: w dimension mismatch");
  return psi.weight.transpose() * (w - psi.offset) + psi.bias;
}

}  // namespace

Vec aux_forward(const AuxSpec& spec, const AuxParams& psi, const Vec& w) {
  const Vec z = aux_logits(spec, psi, w);
  return (z.array() - logsumexp(z)).matrix();
}

double aux_kl_loss(const Vec& phat, const Vec& log_q) {
  if (phat.size() != log_q.size())
    throw std::invalid_argument("aux_kl_loss: size mismatch");
  if ((phat.array() < 0.0).any() || !all_finite(phat) || !all_finite(log_q))
    throw std::invalid_argument("aux_kl_loss: invalid input");
  return -phat.dot(log_q);
}

AuxParams aux_kl_grad(const AuxSpec& spec, const AuxParams& psi, const Vec& w,
                      const Vec& phat) {
  const Vec log_q = aux_forward(spec, psi, w);
  const Vec q = log_q.array().exp().matrix();
  // d/dz_k of -sum_y phat_y logsoftmax(z)_y = -phat_k + q_k * sum(phat)
  const Vec dz = (q * phat.sum() - phat);
  AuxParams g;
  if (spec.kind == AuxKind::Constant) {
    g.logits = dz;
  } else {
    g.bias = dz;
    g.weight = (w - psi.offset) * dz.transpose();
    g.offset = -(psi.weight * dz);
  }
  return g;
}

AuxOptState aux_opt_init(const AuxSpec& spec) {
  AuxOptState s;
  if (spec.kind == AuxKind::Constant) {
    s.logits = AdamState::zeros(spec.n_labels());
  } else {
    s.weight = AdamState::zeros(spec.main_dim * spec.n_labels());
    s.offset = AdamState::zeros(spec.main_dim);
    s.bias = AdamState::zeros(spec.n_labels());
  }
  return s;
}

void aux_step(const AuxSpec& spec, AuxParams& psi, const AuxParams& grad,
              AuxOptState& opt, long t) {
  const AdamConfig base;  // betas/eps shared across blocks
  if (spec.kind == AuxKind::Constant) {
    adam_step(opt.logits, psi.logits, grad.logits, spec.lr_bias, base.beta1,
              base.beta2, base.eps, t);
    return;
  }
  adam_step(opt.bias, psi.bias, grad.bias, spec.lr_bias, base.beta1,
            base.beta2, base.eps, t);
  adam_step(opt.offset, psi.offset, grad.offset, spec.lr_offset, base.beta1,
            base.beta2, base.eps, t);
  Vec flat = Eigen::Map<const Vec>(psi.weight.data(), psi.weight.size());
  const Vec gflat =
      Eigen::Map<const Vec>(grad.weight.data(), grad.weight.size());
  adam_step(opt.weight, flat, gflat, spec.lr_matrix, base.beta1, base.beta2,
            base.eps, t);
  // proximal soft-threshold keeps the matrix sparse
  const double thresh = spec.lr_matrix * spec.sparsity_strength;
  for (Eigen::Index i = 0; i < flat.size(); ++i) {
    const double a = flat[i];
    flat[i] = std::abs(a) <= thresh ? 0.0 : a - std::copysign(thresh, a);
  }
  psi.weight = Eigen::Map<const Mat>(flat.data(), psi.weight.rows(),
                                     psi.weight.cols());
}

}  // namespace prevcorr
