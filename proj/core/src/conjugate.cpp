#include "otmap/conjugate.hpp"

#include <cmath>

namespace otmap {

namespace {

void clip_rows(Mat& X) {
  X = X.cwiseMax(0.0).cwiseMin(1.0);
}

}  // namespace

RowAscentResult projected_ascent_rows(const BrenierPotential& potential, const Mat& Y, Mat X,
                                      double tol, int max_iter) {
  const Eigen::Index r = X.rows();
  clip_rows(X);

  Vec phi_val;
  Mat phi_grad;
  potential.value_and_grad(X, phi_val, phi_grad);
  if (!phi_val.allFinite()) throw NumericalError("conjugate: non-finite potential value");

  // g(x) = <x,y> - phi(x), ascent direction y - grad phi.
  Vec g_val = (X.array() * Y.array()).rowwise().sum().matrix() - phi_val;
  Mat g_dir = Y - phi_grad;

  Vec step = Vec::Constant(r, 1.0);
  std::vector<char> frozen(std::size_t(r), 0);
  std::vector<int> iters(std::size_t(r), 0);

  Mat cand(r, X.cols());
  Vec cand_phi;
  Mat cand_grad;
  for (int it = 0; it < max_iter; ++it) {
    // Convergence by gradient-mapping norm with unit probe step.
    bool all_frozen = true;
    for (Eigen::Index i = 0; i < r; ++i) {
      if (frozen[std::size_t(i)]) continue;
      const double gm =
          (X.row(i) - (X.row(i) + g_dir.row(i)).cwiseMax(0.0).cwiseMin(1.0)).norm();
      if (gm < tol)
        frozen[std::size_t(i)] = 1;
      else
        all_frozen = false;
    }
    if (all_frozen) break;

    cand = X + step.asDiagonal() * g_dir;
    clip_rows(cand);
    potential.value_and_grad(cand, cand_phi, cand_grad);
    if (!cand_phi.allFinite()) throw NumericalError("conjugate: non-finite potential value");

    for (Eigen::Index i = 0; i < r; ++i) {
      if (frozen[std::size_t(i)]) continue;
      ++iters[std::size_t(i)];
      const double cand_val = cand.row(i).dot(Y.row(i)) - cand_phi[i];
      if (cand_val >= g_val[i] - 1e-14) {
        X.row(i) = cand.row(i);
        g_val[i] = cand_val;
        g_dir.row(i) = Y.row(i) - cand_grad.row(i);
        step[i] = std::min(step[i] * 1.25, 1e6);
      } else {
        step[i] = std::max(step[i] * 0.5, 1e-12);
      }
    }
  }

  RowAscentResult out;
  out.argmax = std::move(X);
  out.value = std::move(g_val);
  out.iterations = std::move(iters);
  out.converged = std::move(frozen);
  return out;
}

ConjugateResult conjugate(const BrenierPotential& potential, const Vec& y,
                          const ConjugateConfig& cfg, std::uint64_t point_index,
                          const std::vector<Vec>& warm_starts) {
  const int d = potential.dim();
  if (y.size() != d) throw UsageError("conjugate: y has wrong dimension");

  const int n_starts = 1 + int(warm_starts.size()) + cfg.random_starts;
  Mat X(n_starts, d);
  int row = 0;
  X.row(row++) = clip01(y).transpose();
  for (const auto& w : warm_starts) {
    if (w.size() != d) throw UsageError("conjugate: warm start has wrong dimension");
    X.row(row++) = w.transpose();
  }
  Rng rng = Rng::stream(cfg.seed, point_index);
  for (int k = 0; k < cfg.random_starts; ++k) X.row(row++) = rng.uniform_vec(d).transpose();

  Mat Y = y.transpose().replicate(n_starts, 1);
  RowAscentResult res = projected_ascent_rows(potential, Y, std::move(X), cfg.tol, cfg.max_iter);

  int best = 0;
  for (int i = 1; i < n_starts; ++i)
    if (res.value[i] > res.value[best]) best = i;

  ConjugateResult out;
  out.value = res.value[best];
  out.argmax = res.argmax.row(best).transpose();
  out.iterations = res.iterations[std::size_t(best)];
  out.converged = res.converged[std::size_t(best)] != 0;
  return out;
}

std::vector<ConjugateResult> conjugate_batch(const BrenierPotential& potential, const Mat& ys,
                                             const std::optional<Mat>& warm_starts,
                                             const ConjugateConfig& cfg, int nthreads) {
  if (warm_starts && warm_starts->rows() != ys.rows())
    throw UsageError("conjugate_batch: warm_starts row count mismatch");
  std::vector<ConjugateResult> out(std::size_t(ys.rows()));
  parallel_for(int(ys.rows()), nthreads, [&](int i) {
    std::vector<Vec> warm;
    if (warm_starts) warm.push_back(warm_starts->row(i).transpose());
    out[std::size_t(i)] = conjugate(potential, ys.row(i).transpose(), cfg, std::uint64_t(i), warm);
  });
  return out;
}

}  // namespace otmap
