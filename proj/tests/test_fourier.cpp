#include <doctest.h>

#include <cmath>

#include "otmap/fourier.hpp"

using namespace otmap;

namespace {

constexpr double kSqrt2 = 1.4142135623730950488016887242097;

// Independent summation oracle built on basis_eval only.
double naive_value(const FourierPotential& phi, const Vec& x) {
  double acc = 0;
  for (int i = 0; i < phi.num_coeffs(); ++i)
    acc += phi.coeffs()[i] * basis_eval(phi.frequencies()[std::size_t(i)], x);
  return acc;
}

Vec fd_gradient(const FourierPotential& phi, const Vec& x, double h = 1e-5) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (phi.value(xp) - phi.value(xm)) / (2 * h);
  }
  return g;
}

FourierPotential random_potential(const SmoothnessMap& map, double J, int d, std::uint64_t seed,
                                  double scale = 1.0) {
  FourierPotential phi(map, J, d);
  Rng rng(seed);
  Vec w(phi.num_coeffs());
  for (int i = 0; i < phi.num_coeffs(); ++i) w[i] = scale * (rng.uniform() - 0.5);
  phi.set_coeffs(w);
  return phi;
}

// Trapezoid rule on the periodic unit cube, 2^7 points per axis.
template <typename F>
double cube_quadrature(int d, const F& f) {
  const int n = 128;
  std::vector<int> idx(std::size_t(d), 0);
  double acc = 0;
  for (;;) {
    Vec x(d);
    for (int i = 0; i < d; ++i) x[i] = double(idx[std::size_t(i)]) / n;
    acc += f(x);
    int a = d - 1;
    while (a >= 0 && idx[std::size_t(a)] == n - 1) { idx[std::size_t(a)] = 0; --a; }
    if (a < 0) break;
    ++idx[std::size_t(a)];
  }
  return acc / std::pow(double(n), d);
}

}  // namespace

TEST_CASE("basis_eval definition") {
  Vec x = Vec::Zero(2);
  CHECK(basis_eval(FrequencyIndex{}, x) == 1.0);
  CHECK(basis_eval(FrequencyIndex({{1, -1}}), x) == doctest::Approx(kSqrt2).epsilon(1e-12));
  x[0] = 0.25;
  CHECK(basis_eval(FrequencyIndex({{1, 1}}), x) == doctest::Approx(kSqrt2).epsilon(1e-12));
  CHECK_THROWS_AS(basis_eval(FrequencyIndex({{3, 1}}), x), UsageError);

  SUBCASE("orthonormality under cube quadrature, |l| <= 3, d = 2") {
    std::vector<FrequencyIndex> ls;
    for (int l1 = -3; l1 <= 3; ++l1)
      for (int l2 = -3; l2 <= 3; ++l2) {
        std::vector<FrequencyIndex::Entry> e;
        if (l1 != 0) e.push_back({1, l1});
        if (l2 != 0) e.push_back({2, l2});
        ls.emplace_back(std::move(e));
      }
    for (std::size_t a = 0; a < ls.size(); a += 5)
      for (std::size_t b = a; b < ls.size(); b += 7) {
        const double ip = cube_quadrature(2, [&](const Vec& x) {
          return basis_eval(ls[a], x) * basis_eval(ls[b], x);
        });
        CHECK(ip == doctest::Approx(ls[a] == ls[b] ? 1.0 : 0.0).epsilon(1e-6));
      }
  }
}

TEST_CASE("potential evaluation") {
  const SmoothnessMap m = SmoothnessMap::mixed(WeightRule::power(1, 1));
  FourierPotential zero(m, 9, 3);
  Vec x(3);
  x << 0.3, 0.7, 0.1;
  CHECK(zero.value(x) == 0.0);

  // Single coefficient: 2 * psi_{(1,-1)} at x_1 = 0 gives 2 sqrt 2.
  FourierPotential single(m, 9, 3);
  for (int i = 0; i < single.num_coeffs(); ++i)
    if (single.frequencies()[std::size_t(i)] == FrequencyIndex({{1, -1}}))
      single.set_coeff(i, 2.0);
  CHECK(single.value(Vec::Zero(3)) == doctest::Approx(2 * kSqrt2).epsilon(1e-12));

  SUBCASE("random sparse potential matches the naive oracle on a grid") {
    auto phi = random_potential(m, 12, 3, 42);
    Rng rng(7);
    for (int k = 0; k < 25; ++k) {
      const Vec p = rng.uniform_vec(3);
      CHECK(phi.value(p) == doctest::Approx(naive_value(phi, p)).epsilon(1e-12));
    }
  }
}

TEST_CASE("analytic gradients match central differences") {
  const SmoothnessMap m = SmoothnessMap::mixed(WeightRule::power(1, 1));
  FourierPotential zero(m, 9, 2);
  CHECK(zero.gradient(Vec::Constant(2, 0.4)).norm() == 0.0);

  // phi = psi_{(1,+1)} = sqrt2 sin(2 pi x_1): gradient at 0 is (2 pi sqrt2, 0).
  FourierPotential mode(m, 9, 2);
  for (int i = 0; i < mode.num_coeffs(); ++i)
    if (mode.frequencies()[std::size_t(i)] == FrequencyIndex({{1, 1}})) mode.set_coeff(i, 1.0);
  const Vec g0 = mode.gradient(Vec::Zero(2));
  CHECK(g0[0] == doctest::Approx(2 * M_PI * kSqrt2).epsilon(1e-12));
  CHECK(g0[1] == 0.0);

  SUBCASE("100 random potentials, relative error < 1e-5") {
    Rng rng(3);
    for (int c = 0; c < 100; ++c) {
      auto phi = random_potential(m, 10, 2, 100 + std::uint64_t(c));
      const Vec x = rng.uniform_vec(2);
      const Vec ga = phi.gradient(x);
      const Vec gf = fd_gradient(phi, x);
      CHECK((ga - gf).norm() <= 1e-5 * std::max(1.0, gf.norm()));
    }
  }
}

TEST_CASE("brenier_grad is x minus the gradient") {
  const SmoothnessMap m = SmoothnessMap::mixed(WeightRule::power(1, 1));
  FourierPotential zero(m, 9, 3);
  const Vec x = Vec::Constant(3, 0.25);
  CHECK((zero.brenier_grad(x) - x).norm() == 0.0);  // identity map
  auto phi = random_potential(m, 9, 3, 5);
  const Vec y = phi.brenier_grad(x);
  CHECK((y - (x - phi.gradient(x))).norm() == 0.0);
}

TEST_CASE("h_norm weights") {
  // Mixed(a_i = i): scale {(1,1)} has gamma = 1; alpha = 1.
  const SmoothnessMap m = SmoothnessMap::mixed(WeightRule::power(1, 1));
  FourierPotential phi(m, 9, 2);
  REQUIRE(phi.scales()[0] == DyadicScale({{1, 1}}));
  phi.set_coeff(phi.scale_range(0).first, 1.0);
  CHECK(phi.h_norm(FourierPotential::NormOrder::Gamma) == doctest::Approx(2.0));
  CHECK(phi.h_norm(FourierPotential::NormOrder::GammaPlus2) == doctest::Approx(8.0));
  CHECK(phi.hessian_norm_bound() == doctest::Approx(4 * M_PI * M_PI * 8.0));
  CHECK(FourierPotential(m, 9, 2).h_norm(FourierPotential::NormOrder::Gamma) == 0.0);

  SUBCASE("projection rescales onto the ball") {
    phi.project_to_ball(1.0);
    CHECK(phi.h_norm(FourierPotential::NormOrder::GammaPlus2) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("Parseval at desk scale") {
  const SmoothnessMap m = SmoothnessMap::mixed(WeightRule::power(1, 1));
  auto phi = random_potential(m, 9, 2, 11);
  const double integral = cube_quadrature(2, [&](const Vec& x) { return square(phi.value(x)); });
  CHECK(integral == doctest::Approx(phi.coeffs().squaredNorm()).epsilon(1e-6));
}

TEST_CASE("truncate_reference") {
  const SmoothnessMap m = SmoothnessMap::mixed(WeightRule::power(1, 1));
  auto phi0 = random_potential(m, 15, 3, 13);

  SUBCASE("J below every threshold gives the zero potential") {
    auto t = FourierPotential::truncate_reference(phi0, m, 2.9);
    CHECK(t.num_coeffs() == 0);
    CHECK(t.h_norm(FourierPotential::NormOrder::Gamma) == 0.0);
  }
  SUBCASE("J covering all stored scales is the identity") {
    auto t = FourierPotential::truncate_reference(phi0, m, 15);
    CHECK(t.coeffs() == phi0.coeffs());
  }
  SUBCASE("kept mass equals the brute filter; the norm contracts") {
    const double J = 9;
    auto t = FourierPotential::truncate_reference(phi0, m, J);
    const double factor = 1.0 + 2.0 * m.alpha();
    double expect = 0;
    for (int i = 0; i < phi0.num_coeffs(); ++i) {
      // recover the scale of coefficient i
      for (std::size_t si = 0; si < phi0.scales().size(); ++si) {
        const auto [b, e] = phi0.scale_range(int(si));
        if (i >= b && i < e && factor * m.gamma(phi0.scales()[si]) <= J)
          expect += square(phi0.coeffs()[i]);
      }
    }
    CHECK(t.coeffs().squaredNorm() == doctest::Approx(expect).epsilon(1e-12));
    CHECK(t.h_norm(FourierPotential::NormOrder::GammaPlus2) <=
          phi0.h_norm(FourierPotential::NormOrder::GammaPlus2) + 1e-12);
  }
}

TEST_CASE("from_rule fills coefficients by frequency") {
  const SmoothnessMap m = SmoothnessMap::mixed(WeightRule::power(1, 1));
  auto phi = FourierPotential::from_rule(m, 9, 2, [](const FrequencyIndex& l) {
    return l.entries.size() == 1 && l.entries[0].freq < 0 ? 1.0 / l.norm() : 0.0;
  });
  for (int i = 0; i < phi.num_coeffs(); ++i) {
    const auto& l = phi.frequencies()[std::size_t(i)];
    const double expect =
        l.entries.size() == 1 && l.entries[0].freq < 0 ? 1.0 / l.norm() : 0.0;
    CHECK(phi.coeffs()[i] == expect);
  }
}
