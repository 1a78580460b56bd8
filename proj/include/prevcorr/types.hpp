#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "prevcorr/numeric.hpp"

namespace prevcorr {

// Finite label set. Indices run 0..size-1.
struct LabelSpace {
  int size = 2;
  std::vector<std::string> names;  // optional

  void validate() const;
};

// Probability vector over a label set.
struct LabelDist {
  Vec p;

  LabelDist() = default;
  explicit LabelDist(Vec probs) : p(std::move(probs)) {}
  static LabelDist uniform(int k);
  static LabelDist binary(double p1);  // (1-p1, p1)

  int size() const { return static_cast<int>(p.size()); }
  // entries >= 0, total within tol of 1
  void validate(double tol = 1e-9) const;
  bool strictly_positive() const { return (p.array() > 0.0).all(); }
  Vec log() const { return p.array().log().matrix(); }
};

struct DatasetProvenance {
  std::string generator;
  std::uint64_t seed = 0;
  std::string design;
};

// Feature matrix plus integer labels.
struct Dataset {
  Mat x;               // n x d
  std::vector<int> y;  // n, values in [0, |Y|)
  DatasetProvenance provenance;

  int size() const { return static_cast<int>(y.size()); }
  int dim() const { return static_cast<int>(x.cols()); }
  void validate(int n_labels) const;
  // per-label counts over the label set
  std::vector<int> label_counts(int n_labels) const;
  // empirical label frequencies
  LabelDist label_frequencies(int n_labels) const;
};

}  // namespace prevcorr
