#include "otmap/fourier.hpp"

#include <cmath>
#include <map>

namespace otmap {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kSqrt2 = 1.4142135623730950488016887242097;
}  // namespace

double basis_eval(const FrequencyIndex& l, const Vec& x) {
  double v = 1.0;
  for (const auto& e : l.entries) {
    if (e.axis > x.size())
      throw UsageError("basis_eval: frequency axis " + std::to_string(e.axis) +
                       " exceeds point dimension " + std::to_string(x.size()));
    const double arg = kTwoPi * std::abs(e.freq) * x[e.axis - 1];
    v *= kSqrt2 * (e.freq > 0 ? std::sin(arg) : std::cos(arg));
  }
  return v;
}

Vec basis_grad(const FrequencyIndex& l, const Vec& x) {
  Vec g = Vec::Zero(x.size());
  for (std::size_t j = 0; j < l.entries.size(); ++j) {
    double prod = 1.0;
    for (std::size_t j2 = 0; j2 < l.entries.size(); ++j2) {
      const auto& e = l.entries[j2];
      if (e.axis > x.size()) throw UsageError("basis_grad: axis exceeds point dimension");
      const double m = std::abs(e.freq);
      const double arg = kTwoPi * m * x[e.axis - 1];
      if (j2 == j) {
        // d/dx sqrt2 sin(2 pi m x) =  2 pi m sqrt2 cos(2 pi m x)
        // d/dx sqrt2 cos(2 pi m x) = -2 pi m sqrt2 sin(2 pi m x)
        prod *= kTwoPi * m * kSqrt2 * (e.freq > 0 ? std::cos(arg) : -std::sin(arg));
      } else {
        prod *= kSqrt2 * (e.freq > 0 ? std::sin(arg) : std::cos(arg));
      }
    }
    g[l.entries[j].axis - 1] += prod;
  }
  return g;
}

FourierPotential::FourierPotential(SmoothnessMap map, double J, int ambient_dim, std::size_t cap)
    : map_(std::move(map)), J_(J), ambient_dim_(ambient_dim), alpha_(map_.alpha()) {
  if (ambient_dim_ < 1) throw UsageError("FourierPotential: ambient_dim must be >= 1");
  if (!std::isfinite(alpha_))
    throw UsageError("FourierPotential: alpha(gamma) is infinite; estimator families require "
                     "finite alpha");
  build_basis(cap);
  omega_ = Vec::Zero(num_coeffs());
}

void FourierPotential::build_basis(std::size_t cap) {
  // The basis is the admissible class intersected with functions of the
  // first ambient_dim coordinates.
  scales_ = enumerate_scales(map_, J_, cap, ambient_dim_);
  scale_offsets_ = {0};
  std::map<std::pair<int, int>, int> pair_index;
  std::size_t total = 0;
  for (const auto& s : scales_) {
    const double g = map_.gamma(s);
    weight_gamma_.push_back(std::exp2(2.0 * g));
    weight_gamma2_.push_back(std::exp2(2.0 * (1.0 + 2.0 * alpha_) * g));
    auto freqs = enumerate_frequencies(s, cap);
    total += freqs.size();
    if (total > cap) throw EnumerationCapError("FourierPotential: basis size exceeds cap");
    for (auto& l : freqs) {
      Term t{int(factors_.size()), int(l.entries.size())};
      for (const auto& e : l.entries) {
        auto key = std::make_pair(e.axis, std::abs(e.freq));
        auto [it, inserted] = pair_index.emplace(key, int(pairs_.size()));
        if (inserted) pairs_.push_back(key);
        factors_.push_back({e.axis, std::abs(e.freq), e.freq > 0, it->second});
      }
      terms_.push_back(t);
      freqs_.push_back(std::move(l));
    }
    scale_offsets_.push_back(int(freqs_.size()));
  }
  cos_tab_.resize(pairs_.size());
  sin_tab_.resize(pairs_.size());
}

void FourierPotential::set_coeffs(Vec omega) {
  if (omega.size() != num_coeffs())
    throw UsageError("FourierPotential: coefficient vector has wrong length");
  omega_ = std::move(omega);
}

void FourierPotential::fill_tables(const Vec& x) const {
  for (std::size_t p = 0; p < pairs_.size(); ++p) {
    const auto [axis, m] = pairs_[p];
    const double arg = kTwoPi * m * x[axis - 1];
    cos_tab_[p] = std::cos(arg);
    sin_tab_[p] = std::sin(arg);
  }
}

double FourierPotential::value(const Vec& x) const {
  if (x.size() < ambient_dim_) throw UsageError("FourierPotential: point dimension too small");
  fill_tables(x);
  double acc = 0;
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    const double w = omega_[Eigen::Index(t)];
    if (w == 0.0) continue;
    double prod = w;
    const Term& term = terms_[t];
    for (int f = term.first_factor; f < term.first_factor + term.num_factors; ++f) {
      const Factor& fac = factors_[std::size_t(f)];
      prod *= kSqrt2 * (fac.is_sin ? sin_tab_[std::size_t(fac.pair_idx)]
                                   : cos_tab_[std::size_t(fac.pair_idx)]);
    }
    acc += prod;
  }
  return acc;
}

void FourierPotential::value_and_grad(const Vec& x, double& value, Vec& grad) const {
  if (x.size() < ambient_dim_) throw UsageError("FourierPotential: point dimension too small");
  fill_tables(x);
  value = 0;
  grad.setZero(x.size());
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    const double w = omega_[Eigen::Index(t)];
    if (w == 0.0) continue;
    const Term& term = terms_[t];
    double prod = w;
    for (int f = term.first_factor; f < term.first_factor + term.num_factors; ++f) {
      const Factor& fac = factors_[std::size_t(f)];
      prod *= kSqrt2 * (fac.is_sin ? sin_tab_[std::size_t(fac.pair_idx)]
                                   : cos_tab_[std::size_t(fac.pair_idx)]);
    }
    value += prod;
    for (int f = term.first_factor; f < term.first_factor + term.num_factors; ++f) {
      const Factor& fac = factors_[std::size_t(f)];
      const double c = cos_tab_[std::size_t(fac.pair_idx)];
      const double s = sin_tab_[std::size_t(fac.pair_idx)];
      const double factor_val = fac.is_sin ? s : c;
      const double factor_der = kTwoPi * fac.freq * (fac.is_sin ? c : -s);
      // prod already carries this factor's value; swap it for the derivative.
      if (std::abs(factor_val) > 1e-8) {
        grad[fac.axis - 1] += prod / factor_val * factor_der;
      } else {
        double rest = w;
        for (int f2 = term.first_factor; f2 < term.first_factor + term.num_factors; ++f2) {
          if (f2 == f) continue;
          const Factor& fac2 = factors_[std::size_t(f2)];
          rest *= kSqrt2 * (fac2.is_sin ? sin_tab_[std::size_t(fac2.pair_idx)]
                                        : cos_tab_[std::size_t(fac2.pair_idx)]);
        }
        grad[fac.axis - 1] += rest * kSqrt2 * factor_der;
      }
    }
  }
}

Vec FourierPotential::gradient(const Vec& x) const {
  double v;
  Vec g;
  value_and_grad(x, v, g);
  return g;
}

Vec FourierPotential::brenier_grad(const Vec& x) const { return x - gradient(x); }

void FourierPotential::basis_row(const Vec& x, Vec& out) const {
  fill_tables(x);
  out.resize(num_coeffs());
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    double prod = 1.0;
    const Term& term = terms_[t];
    for (int f = term.first_factor; f < term.first_factor + term.num_factors; ++f) {
      const Factor& fac = factors_[std::size_t(f)];
      prod *= kSqrt2 * (fac.is_sin ? sin_tab_[std::size_t(fac.pair_idx)]
                                   : cos_tab_[std::size_t(fac.pair_idx)]);
    }
    out[Eigen::Index(t)] = prod;
  }
}

double FourierPotential::h_norm(NormOrder order) const {
  const auto& w = order == NormOrder::Gamma ? weight_gamma_ : weight_gamma2_;
  double acc = 0;
  for (std::size_t si = 0; si < scales_.size(); ++si) {
    const auto [b, e] = scale_range(int(si));
    double block = 0;
    for (int i = b; i < e; ++i) block += omega_[i] * omega_[i];
    acc += w[si] * block;
  }
  return std::sqrt(acc);
}

double FourierPotential::hessian_norm_bound() const {
  constexpr double kFourPiSq = 39.478417604357434475337963999505;
  return kFourPiSq * h_norm(NormOrder::GammaPlus2);
}

void FourierPotential::project_to_ball(double radius) {
  const double n = h_norm(NormOrder::GammaPlus2);
  if (n > radius && n > 0) omega_ *= radius / n;
}

FourierPotential FourierPotential::truncate_reference(const FourierPotential& phi0,
                                                      const SmoothnessMap& map, double J) {
  FourierPotential out(map, J, phi0.ambient_dim());
  std::map<FrequencyIndex, double> lookup;
  for (int i = 0; i < phi0.num_coeffs(); ++i)
    lookup.emplace(phi0.freqs_[std::size_t(i)], phi0.omega_[i]);
  for (int i = 0; i < out.num_coeffs(); ++i) {
    auto it = lookup.find(out.freqs_[std::size_t(i)]);
    if (it != lookup.end()) out.omega_[i] = it->second;
  }
  return out;
}

FourierPotential FourierPotential::from_rule(
    SmoothnessMap map, double J, int ambient_dim,
    const std::function<double(const FrequencyIndex&)>& rule) {
  FourierPotential out(std::move(map), J, ambient_dim);
  for (int i = 0; i < out.num_coeffs(); ++i) out.omega_[i] = rule(out.freqs_[std::size_t(i)]);
  return out;
}

}  // namespace otmap
