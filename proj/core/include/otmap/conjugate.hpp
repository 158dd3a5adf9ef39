#pragma once

#include <optional>
#include <vector>

#include "otmap/common.hpp"

namespace otmap {

// A Brenier potential: value and gradient at arbitrary points of [0,1]^d.
// Implementations evaluate whole row-batches at once so that inner solvers
// can amortize matrix products.
class BrenierPotential {
 public:
  virtual ~BrenierPotential() = default;
  virtual int dim() const = 0;
  // X: rows are points. values: per-row potential value. grads: per-row gradient.
  virtual void value_and_grad(const Mat& X, Vec& values, Mat& grads) const = 0;

  double value(const Vec& x) const {
    Mat X = x.transpose();
    Vec v;
    Mat g;
    value_and_grad(X, v, g);
    return v[0];
  }
  Vec grad(const Vec& x) const {
    Mat X = x.transpose();
    Vec v;
    Mat g;
    value_and_grad(X, v, g);
    return g.row(0).transpose();
  }
};

struct ConjugateConfig {
  double tol = 1e-8;       // gradient-mapping norm threshold
  int max_iter = 500;      // ascent sweeps per start set
  int random_starts = 8;   // on top of clip(y) and any warm starts
  std::uint64_t seed = 0;  // random starts come from streams of this seed
};

struct ConjugateResult {
  double value = 0;
  Vec argmax;
  int iterations = 0;
  bool converged = false;
};

// Legendre-Fenchel conjugate phi*(y) = sup_{x in [0,1]^d} <x,y> - phi(x) by
// projected gradient ascent with per-start adaptive steps. point_index keys
// the random-start stream so batches are reproducible element-wise.
ConjugateResult conjugate(const BrenierPotential& potential, const Vec& y,
                          const ConjugateConfig& cfg = {}, std::uint64_t point_index = 0,
                          const std::vector<Vec>& warm_starts = {});

// Same contract per row of ys; warm_starts, when given, adds row i as an
// extra start for point i. Entries may be solved in parallel; results do not
// depend on nthreads.
std::vector<ConjugateResult> conjugate_batch(const BrenierPotential& potential, const Mat& ys,
                                             const std::optional<Mat>& warm_starts = std::nullopt,
                                             const ConjugateConfig& cfg = {}, int nthreads = 1);

// Row-parallel ascent core: maximizes g_r(x) = <x, Y.row(r)> - phi(x) for
// each row independently, starting from X.row(r). Used directly by trainers
// that keep one warm start per sample.
struct RowAscentResult {
  Mat argmax;
  Vec value;
  std::vector<int> iterations;
  std::vector<char> converged;
};
RowAscentResult projected_ascent_rows(const BrenierPotential& potential, const Mat& Y, Mat X,
                                      double tol, int max_iter);

}  // namespace otmap
