#include "prevcorr/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace prevcorr {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

RngStream RngStream::derive(std::uint64_t master, std::string_view name) {
  return RngStream(splitmix64(master ^ fnv1a(name)));
}

int RngStream::uniform_int(int n) {
  if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
  // rejection to avoid modulo bias
  const std::uint64_t un = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return static_cast<int>(x % un);
}

double RngStream::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1, u2;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

int RngStream::categorical(const Eigen::VectorXd& probs) {
  const double u = uniform();
  double acc = 0.0;
  const Eigen::Index k = probs.size();
  for (Eigen::Index i = 0; i < k; ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(k - 1);  // guard against round-off at the top
}

}  // namespace prevcorr
