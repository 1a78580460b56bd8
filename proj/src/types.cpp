#include "prevcorr/types.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace prevcorr {

void LabelSpace::validate() const {
  if (size < 2) throw std::invalid_argument("LabelSpace: size must be >= 2");
  if (!names.empty() && static_cast<int>(names.size()) != size)
    throw std::invalid_argument("LabelSpace: names/size mismatch");
}

LabelDist LabelDist::uniform(int k) {
  return LabelDist(Vec::Constant(k, 1.0 / k));
}

LabelDist LabelDist::binary(double p1) {
  Vec v(2);
  v << 1.0 - p1, p1;
  return LabelDist(v);
}

void LabelDist::validate(double tol) const {
  if (p.size() < 2) throw std::invalid_argument("LabelDist: needs >= 2 entries");
  if (!all_finite(p) || (p.array() < 0.0).any())
    throw std::invalid_argument("LabelDist: entries must be finite and >= 0");
  if (std::abs(p.sum() - 1.0) > tol)
    throw std::invalid_argument("LabelDist: entries must sum to 1, got " +
                                std::to_string(p.sum()));
}

void Dataset::validate(int n_labels) const {
  if (x.rows() != static_cast<Eigen::Index>(y.size()))
    throw std::invalid_argument("Dataset: feature/label row count mismatch");
  if (!all_finite(x)) throw std::invalid_argument("Dataset: non-finite feature");
  for (int label : y)
    if (label < 0 || label >= n_labels)
      throw std::invalid_argument("Dataset: label out of range: " +
                                  std::to_string(label));
}

std::vector<int> Dataset::label_counts(int n_labels) const {
  std::vector<int> counts(static_cast<std::size_t>(n_labels), 0);
  for (int label : y) {
    if (label < 0 || label >= n_labels)
      throw std::invalid_argument("Dataset: label out of range");
    ++counts[static_cast<std::size_t>(label)];
  }
  return counts;
}

LabelDist Dataset::label_frequencies(int n_labels) const {
  const auto counts = label_counts(n_labels);
  Vec f(n_labels);
  for (int k = 0; k < n_labels; ++k)
    f[k] = static_cast<double>(counts[static_cast<std::size_t>(k)]) /
           static_cast<double>(y.size());
  return LabelDist(f);
}

}  // namespace prevcorr
