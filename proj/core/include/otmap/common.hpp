#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace otmap {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr const char* kVersion = "0.1.0";

// Thrown on usage/contract violations (CLI maps these to exit code 1).
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Thrown on numerical failures: non-finite values, diverging optimizers,
// unsatisfiable constructions (CLI maps these to exit code 2).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a scale/frequency enumeration exceeds its configured cap.
struct EnumerationCapError : NumericalError {
  using NumericalError::NumericalError;
};

inline double square(double v) { return v * v; }

inline Vec clip01(Vec x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = std::min(1.0, std::max(0.0, x[i]));
  return x;
}

// splitmix64, used to derive independent streams from (seed, stream ids).
inline std::uint64_t hash_seed(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t combine_seed(std::uint64_t a, std::uint64_t b) {
  return hash_seed(a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2)));
}

// xoshiro256** with explicit distributions so that streams are reproducible
// bit-for-bit regardless of the standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t z = seed;
    for (auto& si : s_) si = (z = hash_seed(z));
  }
  // Stream derived from (seed, id...) so workers can draw independently of
  // scheduling order.
  static Rng stream(std::uint64_t seed, std::uint64_t id0, std::uint64_t id1 = 0) {
    return Rng(combine_seed(combine_seed(seed, id0), id1));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // uniform on [0,1)
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // uniform integer in [0, n)
  std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    // Marsaglia polar method.
    double u, v, r2;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      r2 = u * u + v * v;
    } while (r2 >= 1.0 || r2 == 0.0);
    const double f = std::sqrt(-2.0 * std::log(r2) / r2);
    cached_ = v * f;
    have_cached_ = true;
    return u * f;
  }

  Vec uniform_vec(Eigen::Index n) {
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = uniform();
    return v;
  }

  // Fisher-Yates permutation of {0..n-1}.
  std::vector<int> permutation(int n) {
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    for (int i = n - 1; i > 0; --i) std::swap(p[i], p[size_t(uniform_index(std::uint64_t(i) + 1))]);
    return p;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
  bool have_cached_ = false;
  double cached_ = 0.0;
};

// Runs fn(i) for i in [0, n). Each index must be computable independently of
// worker count; reductions over results belong to the caller so that output
// stays identical for any nthreads.
inline void parallel_for(int n, int nthreads, const std::function<void(int)>& fn) {
  if (nthreads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  const int workers = std::min(nthreads, n);
  pool.reserve(size_t(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace otmap
