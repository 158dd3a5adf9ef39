#include <doctest.h>

#include <cmath>

#include "otmap/assignment.hpp"
#include "otmap/experiments.hpp"
#include "otmap/semidual.hpp"

using namespace otmap;

namespace {

// Test-side oracle: the empirical semi-dual evaluated with exhaustive grid
// conjugates (d <= 2), fully independent of the ascent solver.
double grid_semidual(const FourierPotential& phi, const Mat& X, const Mat& Y,
                     int per_axis = 201) {
  const int d = int(X.cols());
  REQUIRE(d <= 2);
  double mu = 0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) mu += phi.value(X.row(i).transpose());
  mu /= double(X.rows());

  auto brenier = [&](const Vec& x) { return 0.5 * x.squaredNorm() - (phi.value(x) - mu); };
  double conj_sum = 0;
  for (Eigen::Index i = 0; i < Y.rows(); ++i) {
    const Vec y = Y.row(i).transpose();
    double best = -1e300;
    if (d == 1) {
      for (int a = 0; a < per_axis; ++a) {
        Vec x(1);
        x << double(a) / (per_axis - 1);
        best = std::max(best, x.dot(y) - brenier(x));
      }
    } else {
      for (int a = 0; a < per_axis; ++a)
        for (int b = 0; b < per_axis; ++b) {
          Vec x(2);
          x << double(a) / (per_axis - 1), double(b) / (per_axis - 1);
          best = std::max(best, x.dot(y) - brenier(x));
        }
    }
    conj_sum += best;
  }
  return 0.5 * X.rowwise().squaredNorm().mean() + conj_sum / double(Y.rows());
}

// Grid-conjugate argmax, for the Danskin check.
Vec grid_argmax(const FourierPotential& phi, double mu, const Vec& y, int per_axis = 201) {
  auto brenier = [&](const Vec& x) { return 0.5 * x.squaredNorm() - (phi.value(x) - mu); };
  double best = -1e300;
  Vec arg(1);
  for (int a = 0; a < per_axis; ++a) {
    Vec x(1);
    x << double(a) / (per_axis - 1);
    const double v = x.dot(y) - brenier(x);
    if (v > best) {
      best = v;
      arg = x;
    }
  }
  return arg;
}

Mat uniform_cloud(int n, int d, std::uint64_t seed) {
  Mat m(n, d);
  Rng rng(seed);
  for (int i = 0; i < n; ++i) m.row(i) = rng.uniform_vec(d).transpose();
  return m;
}

}  // namespace

TEST_CASE("empirical_semidual closed-form cases") {
  const SmoothnessMap m = SmoothnessMap::mixed(WeightRule::power(1, 1));

  SUBCASE("n = 1, d = 1, zero series") {
    FourierPotential phi(m, 3, 1);
    Mat X(1, 1), Y(1, 1);
    X << 0.5;
    Y << 0.5;
    CHECK(empirical_semidual(phi, X, Y) == doctest::Approx(0.25).epsilon(1e-9));
  }

  SUBCASE("identity coupling value") {
    FourierPotential phi(m, 3, 3);
    const Mat X = uniform_cloud(40, 3, 2);
    const double expect =
        0.5 * X.rowwise().squaredNorm().mean() + 0.5 * X.rowwise().squaredNorm().mean();
    CHECK(empirical_semidual(phi, X, X) == doctest::Approx(expect).epsilon(1e-7));
  }

  SUBCASE("random series matches the grid oracle") {
    FourierPotential phi(m, 6, 2);
    Rng rng(5);
    Vec w(phi.num_coeffs());
    for (int i = 0; i < phi.num_coeffs(); ++i) w[i] = 0.3 * (rng.uniform() - 0.5);
    phi.set_coeffs(w);
    phi.project_to_ball(1.0);
    const Mat X = uniform_cloud(6, 2, 3);
    const Mat Y = uniform_cloud(6, 2, 4);
    ConjugateConfig cc;
    cc.random_starts = 8;
    const double got = empirical_semidual(phi, X, Y, cc);
    CHECK(got == doctest::Approx(grid_semidual(phi, X, Y)).epsilon(1e-4));
  }

  SUBCASE("preconditions") {
    FourierPotential phi(m, 3, 2);
    CHECK_THROWS_AS(empirical_semidual(phi, Mat(0, 2), Mat(0, 2)), UsageError);
    Mat bad(1, 2);
    bad << 1.5, 0.2;
    Mat ok(1, 2);
    ok << 0.5, 0.2;
    CHECK_THROWS_AS(empirical_semidual(phi, bad, ok), UsageError);
  }
}

TEST_CASE("Danskin gradient vs finite differences in omega (grid oracle, d = 1)") {
  const SmoothnessMap m = SmoothnessMap::mixed(WeightRule::power(1, 1));
  FourierPotential phi(m, 4, 1);  // small basis
  REQUIRE(phi.num_coeffs() >= 2);
  Rng rng(8);
  Vec w(phi.num_coeffs());
  for (int i = 0; i < phi.num_coeffs(); ++i) w[i] = 0.05 * (rng.uniform() - 0.5);
  phi.set_coeffs(w);

  const Mat X = uniform_cloud(5, 1, 6);
  const Mat Y = uniform_cloud(5, 1, 7);
  const int n = 5;

  // analytic gradient at the grid argmaxes
  double mu = 0;
  for (int i = 0; i < n; ++i) mu += phi.value(X.row(i).transpose());
  mu /= n;
  Vec grad = Vec::Zero(phi.num_coeffs());
  Vec row(phi.num_coeffs());
  for (int i = 0; i < n; ++i) {
    phi.basis_row(grid_argmax(phi, mu, Y.row(i).transpose(), 2001), row);
    grad += row / n;
    phi.basis_row(X.row(i).transpose(), row);
    grad -= row / n;
  }

  const double h = 1e-5;
  for (int l = 0; l < std::min(4, phi.num_coeffs()); ++l) {
    FourierPotential plus = phi, minus = phi;
    plus.set_coeff(l, w[l] + h);
    minus.set_coeff(l, w[l] - h);
    const double fd = (grid_semidual(plus, X, Y, 2001) - grid_semidual(minus, X, Y, 2001)) / (2 * h);
    CHECK(grad[l] == doctest::Approx(fd).epsilon(1e-3));
  }
}

TEST_CASE("fit on the identity task") {
  const SmoothnessMap m = SmoothnessMap::mixed(WeightRule::power(1, 1));
  const Mat X = uniform_cloud(500, 5, 10);
  SemidualConfig cfg;
  cfg.seed = 1;
  const SemidualFit fit = fit_fourier(X, X, m, cfg);

  SUBCASE("constraint and descent invariants") {
    CHECK(fit.constraint_slack <= 1.0 + 1e-9);
    for (std::size_t t = 1; t < fit.objective_trace.size(); ++t)
      CHECK(fit.objective_trace[t] <= fit.objective_trace[t - 1] + 1e-10);
  }

  SUBCASE("Monte Carlo transport error below the pilot tolerance") {
    Rng rng(12);
    double err = 0;
    for (int k = 0; k < 400; ++k) {
      const Vec u = rng.uniform_vec(5);
      err += (fourier_transport(fit, u) - u).squaredNorm();
    }
    CHECK(err / 400 < 0.01);
  }

  SUBCASE("empty input errors") {
    CHECK_THROWS_AS(fit_fourier(Mat(0, 2), Mat(0, 2), m), UsageError);
    CHECK_THROWS_AS(fit_fourier(uniform_cloud(3, 2, 1), uniform_cloud(4, 2, 1), m), UsageError);
  }
}

TEST_CASE("fit recovers a single-mode ground truth") {
  // T0(x) = x - c sin(2 pi x)/(2 pi): the Kantorovich series is a single
  // cosine mode with omega0 = -c / (4 pi^2 sqrt 2).
  const double c = 0.1;
  const double omega0 = -c / (4 * M_PI * M_PI * std::sqrt(2.0));
  const SmoothnessMap m = SmoothnessMap::mixed(WeightRule::power(1, 1));

  // Pushforward sampled by applying T0 to the uniforms themselves: the
  // empirical coupling is exact, so the check isolates the optimizer.
  const int n = 2000;
  Mat X(n, 1), Y(n, 1);
  Rng rng(21);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = rng.uniform();
    Y(i, 0) = X(i, 0) - c * std::sin(2 * M_PI * X(i, 0)) / (2 * M_PI);
  }

  SemidualConfig cfg;
  cfg.seed = 3;
  cfg.max_iter = 200;
  cfg.tol = 1e-10;
  const SemidualFit fit = fit_fourier(X, Y, m, cfg);

  int mode = -1;
  for (int i = 0; i < fit.potential.num_coeffs(); ++i)
    if (fit.potential.frequencies()[std::size_t(i)] == FrequencyIndex({{1, -1}})) mode = i;
  REQUIRE(mode >= 0);
  CHECK(std::abs(fit.potential.coeffs()[mode] - omega0) <= 0.1 * std::abs(omega0));
}

TEST_CASE("push-forward sanity on the hockey-stick task") {
  const HockeyStickMap truth{5, 1.0};
  auto [X, Y] = gen_pushforward_data(truth, 200, 31);
  const SmoothnessMap m = SmoothnessMap::mixed(WeightRule::power(0.6, 0.1));

  SemidualConfig cfg;
  cfg.seed = 2;
  cfg.max_iter = 20;
  cfg.tol = 1e-9;
  cfg.conj.max_iter = 120;
  const SemidualFit fit = fit_fourier(X, Y, m, cfg);

  Mat TX_init = X;  // zero series transports identically
  Mat TX_fit(200, 5);
  for (int i = 0; i < 200; ++i)
    TX_fit.row(i) = fourier_transport(fit, X.row(i).transpose()).transpose();
  CHECK(w2_distance(TX_fit, Y) < w2_distance(TX_init, Y));
}
