#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace prevcorr {

// Deterministic random stream. All draws go through explicit transforms
// of the raw 64-bit output so that sequences are reproducible across
// platforms and standard-library versions.
//
// Independent sub-streams are derived from a master seed and a stream
// name ("data", "init", "minibatch", ...), so adding draws to one
// component does not perturb the others.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  static RngStream derive(std::uint64_t master, std::string_view name);

  std::uint64_t next_u64() { return gen_(); }

  // uniform on [0, 1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // uniform integer on [0, n)
  int uniform_int(int n);

  // standard normal via Box-Muller
  double normal();

  // index draw from an explicit probability vector (assumed normalized)
  int categorical(const Eigen::VectorXd& probs);

  bool bernoulli(double p) { return uniform() < p; }

  // in-place Fisher-Yates shuffle
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      std::swap(v[static_cast<std::size_t>(i)],
                v[static_cast<std::size_t>(uniform_int(i + 1))]);
    }
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace prevcorr
