#pragma once

#include <vector>

#include "otmap/common.hpp"

namespace otmap {

// Exact optimal coupling between equal-size uniform empirical measures. With
// uniform weights an extremal optimal plan is a permutation.
struct TransportPlan {
  int n = 0;
  std::vector<int> assignment;  // source i -> target assignment[i]
  double cost = 0;              // sum_i ||X_i - Y_{sigma(i)}||^2

  bool valid_permutation() const;
};

// Shortest-augmenting-path solution of the linear assignment problem on the
// squared-Euclidean cost matrix. Deterministic tie-breaking by lowest index.
TransportPlan solve_assignment(const Mat& X, const Mat& Y);

// Nearest-neighbor plug-in transport: maps x to Y_{sigma(i)} for the nearest
// training source X_i (ties resolved to the lowest index).
Vec nn_transport(const TransportPlan& plan, const Mat& X, const Mat& Y, const Vec& x);

// 2-Wasserstein distance between equal-size uniform empirical measures,
// sqrt(assignment cost / n).
double w2_distance(const Mat& X, const Mat& Y);

// Draws n rows from the truncated Sobolev ellipsoid
// { theta in [0,1]^d : sum_j j^{2b} theta_j^2 < 1 }: independent uniforms on
// [0, j^{-b}], rescaled onto boundary*0.999 when the constraint is violated.
Mat sample_sobolev_ellipsoid(double b, int d, int n, std::uint64_t seed);

}  // namespace otmap
