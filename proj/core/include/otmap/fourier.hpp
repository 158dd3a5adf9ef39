#pragma once

#include <functional>
#include <vector>

#include "otmap/gamma.hpp"

namespace otmap {

// Trigonometric basis function psi_l at x: product over stored axes of
// sqrt(2)*cos(2*pi*|l_i|*x_i) for l_i < 0 and sqrt(2)*sin(2*pi*|l_i|*x_i) for
// l_i > 0; the empty index gives 1.
double basis_eval(const FrequencyIndex& l, const Vec& x);

// Analytic gradient of psi_l (zero outside the stored axes).
Vec basis_grad(const FrequencyIndex& l, const Vec& x);

// Sparse Fourier series phi = sum_l omega_l psi_l over the canonical basis of
// all frequencies of all scales admissible under (map, J). The zero frequency
// is never stored; means are handled by the semi-dual layer.
class FourierPotential {
 public:
  enum class NormOrder { Gamma, GammaPlus2 };

  FourierPotential(SmoothnessMap map, double J, int ambient_dim,
                   std::size_t cap = kDefaultEnumerationCap);

  const SmoothnessMap& map() const { return map_; }
  double J() const { return J_; }
  int ambient_dim() const { return ambient_dim_; }
  double alpha() const { return alpha_; }

  int num_coeffs() const { return int(freqs_.size()); }
  const std::vector<DyadicScale>& scales() const { return scales_; }
  const std::vector<FrequencyIndex>& frequencies() const { return freqs_; }
  // Coefficient slice [begin, end) belonging to scales()[scale_idx].
  std::pair<int, int> scale_range(int scale_idx) const {
    return {scale_offsets_[std::size_t(scale_idx)], scale_offsets_[std::size_t(scale_idx) + 1]};
  }

  const Vec& coeffs() const { return omega_; }
  void set_coeffs(Vec omega);
  void set_coeff(int idx, double v) { omega_[idx] = v; }

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  void value_and_grad(const Vec& x, double& value, Vec& grad) const;
  // Transport evaluation of the associated Brenier potential: x - grad(x).
  Vec brenier_grad(const Vec& x) const;
  // Gradient of the semi-dual objective needs per-basis evaluations.
  void basis_row(const Vec& x, Vec& out) const;

  double h_norm(NormOrder order) const;
  // Scalar diagnostic 4*pi^2*||phi||_{H^{gamma+2}}, an operator-norm bound for
  // the Hessian.
  double hessian_norm_bound() const;
  // Rescale omega so that h_norm(GammaPlus2) <= radius (exact projection for
  // the ellipsoidal norm).
  void project_to_ball(double radius = 1.0);

  // Truncation of a reference potential: keeps exactly the coefficients whose
  // scale satisfies (1+2*alpha)*gamma(s) <= J.
  static FourierPotential truncate_reference(const FourierPotential& phi0,
                                             const SmoothnessMap& map, double J);
  // Same, with the reference given as a closed-form coefficient rule l -> omega_l.
  static FourierPotential from_rule(SmoothnessMap map, double J, int ambient_dim,
                                    const std::function<double(const FrequencyIndex&)>& rule);

 private:
  struct Factor {
    int axis;      // 1-based
    int freq;      // |l_i| >= 1
    bool is_sin;   // l_i > 0
    int pair_idx;  // into the per-point sin/cos table
  };
  struct Term {
    int first_factor;
    int num_factors;
  };

  void build_basis(std::size_t cap);
  void fill_tables(const Vec& x) const;

  SmoothnessMap map_;
  double J_;
  int ambient_dim_;
  double alpha_;

  std::vector<DyadicScale> scales_;
  std::vector<int> scale_offsets_;      // size scales_+1
  std::vector<double> weight_gamma_;    // 2^{2 gamma(s)} per scale
  std::vector<double> weight_gamma2_;   // 2^{2 (1+2 alpha) gamma(s)} per scale
  std::vector<FrequencyIndex> freqs_;   // flattened canonical order
  std::vector<Term> terms_;             // one per frequency
  std::vector<Factor> factors_;         // flattened factor storage
  std::vector<std::pair<int, int>> pairs_;  // distinct (axis, |freq|)
  Vec omega_;

  // Per-point sin/cos memo, rebuilt by fill_tables.
  mutable std::vector<double> cos_tab_, sin_tab_;
};

}  // namespace otmap
