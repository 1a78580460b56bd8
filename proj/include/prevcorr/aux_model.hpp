#pragma once

#include "prevcorr/optim.hpp"
#include "prevcorr/types.hpp"

namespace prevcorr {

// Lightweight model of the label marginal as a function of the main
// parameters. Only its values are ever consumed; its own gradient with
// respect to the main parameters is never taken.
enum class AuxKind { Constant, Affine };

struct AuxSpec {
  AuxKind kind = AuxKind::Constant;
  int main_dim = 0;  // dimension of the main parameter vector
  LabelSpace labels;
  double lr_bias = 1e-1;
  double lr_offset = 1e-2;
  double lr_matrix = 1e-2;
  double sparsity_strength = 1e-3;  // L1 prox threshold on the matrix block

  void validate() const;
  int n_labels() const { return labels.size; }
};

struct AuxParams {
  // Constant kind: logits only.
  // Affine kind: logits(w) = weight^T (w - offset) + bias.
  Vec logits;  // |Y| (Constant)
  Mat weight;  // P x |Y| (Affine)
  Vec offset;  // P (Affine)
  Vec bias;    // |Y| (Affine)
};

// Offset starts at the initial main parameters so the linear part sees
// centered inputs; logits/bias warm-start at the log prevalence.
AuxParams aux_init(const AuxSpec& spec, const Vec& w0, const LabelDist& p_y);

// Log-probability vector over labels (log-softmax of the logits).
Vec aux_forward(const AuxSpec& spec, const AuxParams& psi, const Vec& w);

// -sum_y phat(y) log q(y). phat is a (detached) marginal estimate and
// need not sum to exactly 1.
double aux_kl_loss(const Vec& phat, const Vec& log_q);

// Gradient of aux_kl_loss with respect to the auxiliary parameters,
// with phat treated as a constant.
AuxParams aux_kl_grad(const AuxSpec& spec, const AuxParams& psi, const Vec& w,
                      const Vec& phat);

// Per-block Adam state (bias/logits learn fastest, then the matrix,
// offset tracks the main learning rate).
struct AuxOptState {
  AdamState logits, weight, offset, bias;
};

AuxOptState aux_opt_init(const AuxSpec& spec);

// One optimizer step on every block, followed by soft-thresholding of
// the matrix block (L1 prox at lr_matrix * sparsity_strength).
void aux_step(const AuxSpec& spec, AuxParams& psi, const AuxParams& grad,
              AuxOptState& opt, long t);

}  // namespace prevcorr
