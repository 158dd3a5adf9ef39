#pragma once

#include <vector>

#include "otmap/conjugate.hpp"
#include "otmap/fourier.hpp"

namespace otmap {

// Brenier potential ||x||^2/2 - (phi(x) - mean_offset) for a Fourier series phi.
class FourierBrenier : public BrenierPotential {
 public:
  FourierBrenier(const FourierPotential& phi, double mean_offset)
      : phi_(phi), mean_offset_(mean_offset) {}
  int dim() const override { return phi_.ambient_dim(); }
  void value_and_grad(const Mat& X, Vec& values, Mat& grads) const override;

 private:
  const FourierPotential& phi_;
  double mean_offset_;
};

struct SemidualConfig {
  int J = 0;             // 0: select_J(map, n)
  double tol = 1e-7;     // relative objective-change stop
  int max_iter = 300;
  double ball_radius = 1.0;
  ConjugateConfig conj{.tol = 1e-8, .max_iter = 300, .random_starts = 2};
  int threads = 1;
  std::uint64_t seed = 0;
};

struct SemidualFit {
  FourierPotential potential;           // the Kantorovich series phi-hat
  std::vector<double> objective_trace;  // accepted S_n values, nonincreasing
  double constraint_slack = 0;          // ||phi-hat||_{H^{gamma+2}}
  int n = 0;
  int J = 0;
};

// Empirical semi-dual value S_n(varphi) with varphi = ||.||^2/2 - (phi - mean_n phi),
// the mean-zero constraint enforced by centering at the empirical X-mean.
double empirical_semidual(const FourierPotential& phi, const Mat& X, const Mat& Y,
                          const ConjugateConfig& conj_cfg = {}, int threads = 1);

// Projected gradient descent on the coefficients: Danskin gradients at the
// conjugate argmaxes, radial projection onto the H^{gamma+2} ball after every
// step, warm-started conjugates across iterations.
SemidualFit fit_fourier(const Mat& X, const Mat& Y, const SmoothnessMap& map,
                        SemidualConfig cfg = {});

// T-hat(x) = clip(x - grad phi-hat(x)).
Vec fourier_transport(const SemidualFit& fit, const Vec& x);

}  // namespace otmap
