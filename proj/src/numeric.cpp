#include "prevcorr/numeric.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace prevcorr {

double logsumexp(const Vec& v) {
  if (v.size() == 0) return neg_inf();
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;  // all -inf (or a nan propagates)
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

double logaddexp(double a, double b) {
  if (a == neg_inf()) return b;
  if (b == neg_inf()) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

double log_sigmoid(double z) {
  if (z >= 0) return -std::log1p(std::exp(-z));
  return z - std::log1p(std::exp(z));
}

double digamma(double x) {
  if (!(x > 0)) throw std::invalid_argument("digamma: argument must be > 0");
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  // asymptotic series: ln x - 1/(2x) - sum_k B_{2k} / (2k x^{2k})
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = std::log(x) - 0.5 * inv;
  static const double coef[] = {
      1.0 / 12.0,   -1.0 / 120.0,   1.0 / 252.0,  -1.0 / 240.0,
      1.0 / 132.0,  -691.0 / 32760.0, 1.0 / 12.0};
  double p = inv2;
  for (double c : coef) {
    series -= c * p;
    p *= inv2;
  }
  return result + series;
}

double pairwise_sum(const Vec& v) {
  std::function<double(Eigen::Index, Eigen::Index)> rec =
      [&](Eigen::Index lo, Eigen::Index hi) -> double {
    if (hi - lo <= 8) {
      double s = 0.0;
      for (Eigen::Index i = lo; i < hi; ++i) s += v[i];
      return s;
    }
    const Eigen::Index mid = lo + (hi - lo) / 2;
    return rec(lo, mid) + rec(mid, hi);
  };
  return rec(0, v.size());
}

namespace {

int thread_cap() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  if (const char* env = std::getenv("PREVCORR_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap >= 1) hw = std::min(hw, cap);
    } catch (...) {
      // malformed value: ignore and keep the hardware default
    }
  }
  return hw;
}

}  // namespace

void parallel_for(long n, const std::function<void(long)>& fn) {
  const int threads = thread_cap();
  if (threads <= 1 || n < 256) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::atomic<long> next{0};
  const long chunk = std::max(1L, n / (threads * 8));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        const long lo = next.fetch_add(chunk);
        if (lo >= n) break;
        const long hi = std::min(n, lo + chunk);
        for (long i = lo; i < hi; ++i) fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace prevcorr
