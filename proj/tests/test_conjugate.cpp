#include <doctest.h>

#include <cmath>

#include "otmap/conjugate.hpp"
#include "otmap/fourier.hpp"
#include "otmap/semidual.hpp"

using namespace otmap;

namespace {

// phi(x) = ||x||^2/2 + <b, x>; eta-strongly convex test family (eta = 1).
class QuadraticBrenier : public BrenierPotential {
 public:
  explicit QuadraticBrenier(Vec b) : b_(std::move(b)) {}
  int dim() const override { return int(b_.size()); }
  void value_and_grad(const Mat& X, Vec& values, Mat& grads) const override {
    values = 0.5 * X.rowwise().squaredNorm() + X * b_;
    grads = X.rowwise() + b_.transpose();
  }

 private:
  Vec b_;
};

// phi(x) = 0 (not a Brenier potential, exercises the box-LP corner case).
class ZeroPotential : public BrenierPotential {
 public:
  explicit ZeroPotential(int d) : d_(d) {}
  int dim() const override { return d_; }
  void value_and_grad(const Mat& X, Vec& values, Mat& grads) const override {
    values = Vec::Zero(X.rows());
    grads = Mat::Zero(X.rows(), X.cols());
  }

 private:
  int d_;
};

// Exhaustive 201-per-axis grid search, the test oracle for d <= 2.
double grid_conjugate(const BrenierPotential& pot, const Vec& y, int per_axis = 201) {
  const int d = pot.dim();
  REQUIRE(d <= 2);
  double best = -1e300;
  if (d == 1) {
    for (int i = 0; i < per_axis; ++i) {
      Vec x(1);
      x << double(i) / (per_axis - 1);
      best = std::max(best, x.dot(y) - pot.value(x));
    }
    return best;
  }
  for (int i = 0; i < per_axis; ++i)
    for (int j = 0; j < per_axis; ++j) {
      Vec x(2);
      x << double(i) / (per_axis - 1), double(j) / (per_axis - 1);
      best = std::max(best, x.dot(y) - pot.value(x));
    }
  return best;
}

FourierPotential random_unit_ball_potential(const SmoothnessMap& m, int d, std::uint64_t seed) {
  FourierPotential phi(m, 9, d);
  Rng rng(seed);
  Vec w(phi.num_coeffs());
  for (int i = 0; i < phi.num_coeffs(); ++i) w[i] = rng.uniform() - 0.5;
  phi.set_coeffs(w);
  phi.project_to_ball(1.0);
  return phi;
}

}  // namespace

TEST_CASE("quadratic potential has an exact interior conjugate") {
  QuadraticBrenier pot(Vec::Zero(3));  // phi = ||x||^2/2
  Rng rng(1);
  for (int k = 0; k < 10; ++k) {
    const Vec y = rng.uniform_vec(3);
    const auto res = conjugate(pot, y);
    CHECK(res.converged);
    CHECK(res.value == doctest::Approx(0.5 * y.squaredNorm()).epsilon(1e-10));
    CHECK((res.argmax - y).norm() < 1e-7);
  }
}

TEST_CASE("zero potential reduces to a box LP") {
  ZeroPotential pot(2);
  Vec y(2);
  y << 0.5, -0.3;
  const auto res = conjugate(pot, y);
  CHECK(res.value == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(res.argmax[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(res.argmax[1] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("argmax stays in the box") {
  QuadraticBrenier pot(Vec::Constant(2, -2.0));  // pushes the optimum outside
  const auto res = conjugate(pot, Vec::Constant(2, 1.0));
  for (int i = 0; i < 2; ++i) {
    CHECK(res.argmax[i] >= -1e-12);
    CHECK(res.argmax[i] <= 1.0 + 1e-12);
  }
}

TEST_CASE("random Fourier Brenier potentials match the grid oracle") {
  const SmoothnessMap m = SmoothnessMap::mixed(WeightRule::power(1, 1));
  Rng rng(17);
  for (int c = 0; c < 10; ++c) {
    const auto phi = random_unit_ball_potential(m, 2, 1000 + std::uint64_t(c));
    FourierBrenier pot(phi, 0.0);
    const Vec y = rng.uniform_vec(2);
    ConjugateConfig cfg;
    cfg.random_starts = 12;
    const auto res = conjugate(pot, y, cfg, std::uint64_t(c));
    const double oracle = grid_conjugate(pot, y);
    CHECK(res.value == doctest::Approx(oracle).epsilon(1e-4));

    // Fenchel-Young on random probes: phi(x) + phi*(y) >= <x,y> - 1e-8.
    for (int p = 0; p < 100; ++p) {
      const Vec x = rng.uniform_vec(2);
      CHECK(pot.value(x) + res.value >= x.dot(y) - 1e-8);
    }
  }
}

TEST_CASE("strong convexity gives multistart agreement") {
  Rng rng(23);
  for (int c = 0; c < 5; ++c) {
    Vec b(3);
    for (int i = 0; i < 3; ++i) b[i] = rng.uniform(-0.3, 0.3);
    QuadraticBrenier pot(b);
    const Vec y = rng.uniform_vec(3);
    ConjugateConfig cfg;
    cfg.random_starts = 8;
    const auto res = conjugate(pot, y, cfg);
    // All starts of a strongly concave problem land on the same argmax.
    Rng rng2(99);
    for (int s = 0; s < 5; ++s) {
      ConjugateConfig one;
      one.random_starts = 0;
      const auto r2 =
          conjugate(pot, y, one, 0, {rng2.uniform_vec(3)});
      CHECK((r2.argmax - res.argmax).norm() < 1e-6);
    }
  }
}

TEST_CASE("conjugate value is convex in y (midpoint inequality)") {
  QuadraticBrenier pot(Vec::Constant(2, 0.1));
  Rng rng(5);
  for (int k = 0; k < 20; ++k) {
    const Vec y1 = rng.uniform_vec(2), y2 = rng.uniform_vec(2);
    const double f1 = conjugate(pot, y1).value;
    const double f2 = conjugate(pot, y2).value;
    const double fm = conjugate(pot, ((y1 + y2) / 2).eval()).value;
    CHECK(fm <= 0.5 * (f1 + f2) + 1e-8);
  }
}

TEST_CASE("conjugate_batch") {
  QuadraticBrenier pot(Vec::Zero(2));

  SUBCASE("empty input") { CHECK(conjugate_batch(pot, Mat(0, 2)).empty()); }

  SUBCASE("repeated points give identical results") {
    Mat ys(3, 2);
    ys << 0.4, 0.6, 0.4, 0.6, 0.4, 0.6;
    ConjugateConfig cfg;
    cfg.seed = 7;
    auto rs = conjugate_batch(pot, ys, std::nullopt, cfg);
    // Identical inputs, identical per-index streams is not guaranteed; but
    // the solved optimum of a strongly concave problem is unique.
    CHECK(rs[0].value == doctest::Approx(rs[1].value).epsilon(1e-12));
    CHECK(rs[1].value == doctest::Approx(rs[2].value).epsilon(1e-12));
  }

  SUBCASE("batch equals per-point calls and is thread-count invariant") {
    Rng rng(31);
    Mat ys(6, 2);
    for (int i = 0; i < 6; ++i) ys.row(i) = rng.uniform_vec(2).transpose();
    ConjugateConfig cfg;
    cfg.seed = 3;
    const auto batch1 = conjugate_batch(pot, ys, std::nullopt, cfg, 1);
    const auto batch2 = conjugate_batch(pot, ys, std::nullopt, cfg, 4);
    for (int i = 0; i < 6; ++i) {
      const auto single = conjugate(pot, ys.row(i).transpose(), cfg, std::uint64_t(i));
      CHECK(std::abs(batch1[std::size_t(i)].value - single.value) <= 1e-12);
      // bitwise invariance across worker counts
      CHECK(batch1[std::size_t(i)].value == batch2[std::size_t(i)].value);
      CHECK(batch1[std::size_t(i)].argmax == batch2[std::size_t(i)].argmax);
    }
  }

  SUBCASE("warm starts only extend the start set") {
    Mat ys(2, 2);
    ys << 0.2, 0.9, 0.7, 0.3;
    Mat warm = ys;
    ConjugateConfig cfg;
    const auto with = conjugate_batch(pot, ys, warm, cfg);
    const auto without = conjugate_batch(pot, ys, std::nullopt, cfg);
    for (std::size_t i = 0; i < 2; ++i)
      CHECK(with[i].value == doctest::Approx(without[i].value).epsilon(1e-10));
  }
}

TEST_CASE("non-finite potential values raise a numerical error") {
  class BadPotential : public BrenierPotential {
   public:
    int dim() const override { return 1; }
    void value_and_grad(const Mat& X, Vec& values, Mat& grads) const override {
      values = Vec::Constant(X.rows(), std::nan(""));
      grads = Mat::Zero(X.rows(), 1);
    }
  } bad;
  CHECK_THROWS_AS(conjugate(bad, Vec::Constant(1, 0.5)), NumericalError);
}
