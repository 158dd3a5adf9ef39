#include "otmap/assignment.hpp"

#include <cmath>
#include <limits>

namespace otmap {

bool TransportPlan::valid_permutation() const {
  if (int(assignment.size()) != n) return false;
  std::vector<char> seen(std::size_t(n), 0);
  for (int t : assignment) {
    if (t < 0 || t >= n || seen[std::size_t(t)]) return false;
    seen[std::size_t(t)] = 1;
  }
  return true;
}

TransportPlan solve_assignment(const Mat& X, const Mat& Y) {
  if (X.rows() != Y.rows() || X.cols() != Y.cols())
    throw UsageError("solve_assignment: sample matrices must have equal shape");
  const int n = int(X.rows());
  if (n == 0) throw UsageError("solve_assignment: empty samples");
  if (n > 5000) throw UsageError("solve_assignment: n exceeds the 5000-point budget");

  Mat cost(n, n);
  for (int i = 0; i < n; ++i)
    cost.row(i) = (Y.rowwise() - X.row(i)).rowwise().squaredNorm().transpose();

  // Jonker-Volgenant style shortest augmenting paths with dual potentials,
  // 1-based internal indexing.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(std::size_t(n) + 1, 0.0), v(std::size_t(n) + 1, 0.0);
  std::vector<int> match(std::size_t(n) + 1, 0);  // column -> row
  std::vector<int> way(std::size_t(n) + 1, 0);

  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(std::size_t(n) + 1, kInf);
    std::vector<char> used(std::size_t(n) + 1, 0);
    do {
      used[std::size_t(j0)] = 1;
      const int i0 = match[std::size_t(j0)];
      int j1 = 0;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[std::size_t(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[std::size_t(i0)] - v[std::size_t(j)];
        if (cur < minv[std::size_t(j)]) {
          minv[std::size_t(j)] = cur;
          way[std::size_t(j)] = j0;
        }
        if (minv[std::size_t(j)] < delta) {  // strict: lowest index wins ties
          delta = minv[std::size_t(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[std::size_t(j)]) {
          u[std::size_t(match[std::size_t(j)])] += delta;
          v[std::size_t(j)] -= delta;
        } else {
          minv[std::size_t(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[std::size_t(j0)] != 0);
    do {
      const int j1 = way[std::size_t(j0)];
      match[std::size_t(j0)] = match[std::size_t(j1)];
      j0 = j1;
    } while (j0);
  }

  TransportPlan plan;
  plan.n = n;
  plan.assignment.assign(std::size_t(n), -1);
  for (int j = 1; j <= n; ++j)
    if (match[std::size_t(j)]) plan.assignment[std::size_t(match[std::size_t(j)] - 1)] = j - 1;
  plan.cost = 0;
  for (int i = 0; i < n; ++i) plan.cost += cost(i, plan.assignment[std::size_t(i)]);
  return plan;
}

Vec nn_transport(const TransportPlan& plan, const Mat& X, const Mat& Y, const Vec& x) {
  if (int(X.rows()) != plan.n || int(Y.rows()) != plan.n)
    throw UsageError("nn_transport: plan size does not match samples");
  if (x.size() != X.cols()) throw UsageError("nn_transport: query dimension mismatch");
  int best = 0;
  double best_d = (X.row(0).transpose() - x).squaredNorm();
  for (int i = 1; i < plan.n; ++i) {
    const double d = (X.row(i).transpose() - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return Y.row(plan.assignment[std::size_t(best)]).transpose();
}

double w2_distance(const Mat& X, const Mat& Y) {
  const TransportPlan plan = solve_assignment(X, Y);
  return std::sqrt(plan.cost / double(plan.n));
}

Mat sample_sobolev_ellipsoid(double b, int d, int n, std::uint64_t seed) {
  if (b <= 0) throw UsageError("sample_sobolev_ellipsoid: b must be positive");
  if (d < 1 || n < 1) throw UsageError("sample_sobolev_ellipsoid: d and n must be >= 1");
  Mat out(n, d);
  for (int i = 0; i < n; ++i) {
    Rng rng = Rng::stream(seed, std::uint64_t(i));
    double s = 0;
    for (int j = 1; j <= d; ++j) {
      const double theta = rng.uniform() * std::pow(double(j), -b);
      out(i, j - 1) = theta;
      s += std::pow(double(j), 2 * b) * theta * theta;
    }
    if (s >= 1.0) out.row(i) *= 0.999 / std::sqrt(s);
  }
  return out;
}

}  // namespace otmap
