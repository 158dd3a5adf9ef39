#include "otmap/semidual.hpp"

#include <cmath>
#include <iostream>

namespace otmap {

void FourierBrenier::value_and_grad(const Mat& X, Vec& values, Mat& grads) const {
  values.resize(X.rows());
  grads.resize(X.rows(), X.cols());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double v;
    Vec g;
    phi_.value_and_grad(X.row(i).transpose(), v, g);
    values[i] = 0.5 * X.row(i).squaredNorm() - (v - mean_offset_);
    grads.row(i) = X.row(i) - g.transpose();
  }
}

namespace {

void check_unit_box(const Mat& M, const char* name) {
  if ((M.array() < -1e-12).any() || (M.array() > 1.0 + 1e-12).any())
    throw UsageError(std::string("semidual: ") + name + " has entries outside [0,1]");
}

double phi_mean_over(const FourierPotential& phi, const Mat& X) {
  double acc = 0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) acc += phi.value(X.row(i).transpose());
  return acc / double(X.rows());
}

double conj_mean(const std::vector<ConjugateResult>& rs) {
  double acc = 0;
  for (const auto& r : rs) acc += r.value;
  return acc / double(rs.size());
}

}  // namespace

double empirical_semidual(const FourierPotential& phi, const Mat& X, const Mat& Y,
                          const ConjugateConfig& conj_cfg, int threads) {
  if (X.rows() == 0 || Y.rows() == 0) throw UsageError("empirical_semidual: empty sample");
  if (X.cols() != Y.cols()) throw UsageError("empirical_semidual: dimension mismatch");
  check_unit_box(X, "X");
  check_unit_box(Y, "Y");
  const double mu = phi_mean_over(phi, X);
  FourierBrenier pot(phi, mu);
  const auto conj = conjugate_batch(pot, Y, std::nullopt, conj_cfg, threads);
  // Centering makes the P_n-term of the centered series vanish.
  return 0.5 * X.rowwise().squaredNorm().mean() + conj_mean(conj);
}

SemidualFit fit_fourier(const Mat& X, const Mat& Y, const SmoothnessMap& map, SemidualConfig cfg) {
  const int n = int(X.rows());
  if (n == 0) throw UsageError("fit_fourier: empty sample");
  if (Y.rows() != X.rows() || Y.cols() != X.cols())
    throw UsageError("fit_fourier: X and Y must have equal shape");
  check_unit_box(X, "X");
  check_unit_box(Y, "Y");
  const int d = int(X.cols());

  const double alpha = map.alpha();
  if (!std::isfinite(alpha)) throw UsageError("fit_fourier: alpha(gamma) is infinite");
  if (alpha > 1.0)
    std::cerr << "[otmap] warning: alpha(gamma) = " << alpha
              << " > 1 is outside the theorem hypothesis; proceeding\n";

  const int J = cfg.J > 0 ? cfg.J : select_J(map, std::size_t(n));
  cfg.conj.seed = cfg.seed;

  SemidualFit fit{FourierPotential(map, double(J), d), {}, 0, n, J};
  FourierPotential& phi = fit.potential;
  const int m = phi.num_coeffs();

  // X-side basis mean is constant across iterations.
  Vec mean_psi_X = Vec::Zero(m);
  {
    Vec row(m);
    for (int i = 0; i < n; ++i) {
      phi.basis_row(X.row(i).transpose(), row);
      mean_psi_X += row;
    }
    mean_psi_X /= double(n);
  }
  const double x_sq_mean = 0.5 * X.rowwise().squaredNorm().mean();

  Mat warm = Y.cwiseMax(0.0).cwiseMin(1.0);
  bool warmed_up = false;
  auto solve_conj = [&](double mu, const Mat& starts) {
    FourierBrenier pot(phi, mu);
    // Random multistarts only until warm starts exist; performance-only, the
    // final objective matches a cold-started solve within tolerance.
    ConjugateConfig cc = cfg.conj;
    if (warmed_up) cc.random_starts = 0;
    return conjugate_batch(pot, Y, starts, cc, cfg.threads);
  };

  auto gradient_at = [&](const std::vector<ConjugateResult>& conj) {
    Vec g = -mean_psi_X;
    Vec row(m);
    for (int i = 0; i < n; ++i) {
      phi.basis_row(conj[std::size_t(i)].argmax, row);
      g += row / double(n);
    }
    return g;
  };

  auto conj0 = solve_conj(phi_mean_over(phi, X), warm);
  double S = x_sq_mean + conj_mean(conj0);
  fit.objective_trace.push_back(S);
  Vec grad = gradient_at(conj0);
  for (int i = 0; i < n; ++i) warm.row(i) = conj0[std::size_t(i)].argmax.transpose();
  warmed_up = true;

  double lipschitz = std::max(1.0, grad.norm());
  Vec omega_prev = phi.coeffs();
  Vec grad_prev = grad;

  for (int it = 0; it < cfg.max_iter; ++it) {
    if (grad.norm() < 1e-14) break;
    double step = 0.5 / lipschitz;
    const Vec omega_cur = phi.coeffs();

    bool accepted = false;
    Vec omega_new;
    std::vector<ConjugateResult> conj_new;
    double S_new = S;
    for (int bt = 0; bt < 20; ++bt) {
      omega_new = omega_cur - step * grad;
      phi.set_coeffs(omega_new);
      phi.project_to_ball(cfg.ball_radius);
      omega_new = phi.coeffs();
      conj_new = solve_conj(phi_mean_over(phi, X), warm);
      S_new = x_sq_mean + conj_mean(conj_new);
      if (S_new <= S + 1e-10) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      phi.set_coeffs(omega_cur);
      break;
    }

    for (int i = 0; i < n; ++i) warm.row(i) = conj_new[std::size_t(i)].argmax.transpose();
    fit.objective_trace.push_back(S_new);
    const double rel_change = std::abs(S - S_new) / std::max(std::abs(S), 1e-12);
    S = S_new;

    grad = gradient_at(conj_new);
    const double dw = (phi.coeffs() - omega_prev).norm();
    if (dw > 1e-14) {
      const double ratio = (grad - grad_prev).norm() / dw;
      lipschitz = std::max({ratio, 0.5 * lipschitz, 1e-3});
    }
    omega_prev = phi.coeffs();
    grad_prev = grad;

    if (rel_change < cfg.tol) break;
  }

  fit.constraint_slack = phi.h_norm(FourierPotential::NormOrder::GammaPlus2);
  return fit;
}

Vec fourier_transport(const SemidualFit& fit, const Vec& x) {
  return clip01(fit.potential.brenier_grad(x));
}

}  // namespace otmap
