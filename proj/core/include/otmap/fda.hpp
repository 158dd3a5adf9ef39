#pragma once

#include <string>

#include "otmap/experiments.hpp"

namespace otmap {

// Discretized functions on a common grid; rows are functions (or time steps).
struct FunctionSample {
  Vec grid;    // strictly increasing abscissae, length >= 2
  Mat values;  // n_functions x n_grid

  void validate() const;
};

// Scaled orthonormal-cosine coefficient map w_{ij} = c1 <X_i, u_j> + c2 with
// u_j(t) = sqrt(2/|I|) cos(pi j (t - t0)/|I|), j >= 1 (mean-zero convention).
// The optional tensor2d mode reads each row as a row-major rows x cols grid
// and uses the tensor basis u_{j1} x u_{j2}, j1,j2 in {1..k}, n_coeffs = k^2.
struct CoeffConfig {
  int n_coeffs = 8;
  double c1 = 1.0;
  double c2 = 0.0;
  bool tensor2d = false;
  int rows = 0;
  int cols = 0;
};

// Raw (unscaled) cosine coefficients, n_functions x n_coeffs.
Mat raw_cosine_coeffs(const FunctionSample& fs, const CoeffConfig& cfg);

// Affine-mapped coefficients in [0,1]; throws naming the offending (i, j)
// entry when a coefficient leaves the unit interval.
Mat to_coeffs(const FunctionSample& fs, const CoeffConfig& cfg);

// Inverse: undo the affine map and synthesize sum_j theta_j u_j on the grid.
FunctionSample from_coeffs(const Mat& coeffs, const CoeffConfig& cfg, const Vec& grid);

// Data-driven (c1, c2): min/max of the raw coefficients with a margin, so the
// calibration set maps into [margin, 1-margin].
CoeffConfig calibrate_scaling(const FunctionSample& fs, int n_coeffs, double margin = 0.05,
                              bool tensor2d = false, int rows = 0, int cols = 0);

// to_coeffs -> rowwise transport -> from_coeffs on the same grid.
FunctionSample transport_functions(const FunctionSample& fs, const TransportFn& estimator,
                                   const CoeffConfig& cfg);

// Classic DTW with squared pointwise cost and an unconstrained warping band.
double dtw_distance(const Vec& a, const Vec& b);

// Mean over grid coordinates of DTW between the column time series of A and B.
double avg_dtw(const FunctionSample& A, const FunctionSample& B);

}  // namespace otmap
