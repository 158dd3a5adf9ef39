#include "otmap/fda.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace otmap {

void FunctionSample::validate() const {
  if (grid.size() < 2) throw UsageError("FunctionSample: grid length must be >= 2");
  for (Eigen::Index k = 0; k + 1 < grid.size(); ++k)
    if (!(grid[k] < grid[k + 1]))
      throw UsageError("FunctionSample: grid must be strictly increasing");
  if (values.cols() != grid.size())
    throw UsageError("FunctionSample: values width must match grid length");
  if (!values.allFinite()) throw UsageError("FunctionSample: values must be finite");
}

namespace {

constexpr double kPi = 3.1415926535897932384626433832795;

// u_j sampled on the grid, j >= 1.
Vec cosine_on_grid(const Vec& grid, int j) {
  const double t0 = grid[0];
  const double len = grid[grid.size() - 1] - t0;
  Vec u(grid.size());
  for (Eigen::Index k = 0; k < grid.size(); ++k)
    u[k] = std::sqrt(2.0 / len) * std::cos(kPi * j * (grid[k] - t0) / len);
  return u;
}

Vec trapezoid_weights(const Vec& grid) {
  Vec w = Vec::Zero(grid.size());
  for (Eigen::Index k = 0; k + 1 < grid.size(); ++k) {
    const double h = grid[k + 1] - grid[k];
    w[k] += 0.5 * h;
    w[k + 1] += 0.5 * h;
  }
  return w;
}

// Uniform [0,1] abscissae for one axis of the tensor mode.
Vec unit_grid(int n) {
  Vec g(n);
  for (int k = 0; k < n; ++k) g[k] = double(k) / double(n - 1);
  return g;
}

void check_tensor_cfg(const FunctionSample& fs, const CoeffConfig& cfg) {
  if (cfg.rows < 2 || cfg.cols < 2)
    throw UsageError("CoeffConfig: tensor2d mode needs rows, cols >= 2");
  if (Eigen::Index(cfg.rows) * cfg.cols != fs.values.cols())
    throw UsageError("CoeffConfig: rows*cols does not match the flattened grid length");
  const int k = int(std::lround(std::sqrt(double(cfg.n_coeffs))));
  if (k * k != cfg.n_coeffs)
    throw UsageError("CoeffConfig: tensor2d n_coeffs must be a perfect square");
}

}  // namespace

Mat raw_cosine_coeffs(const FunctionSample& fs, const CoeffConfig& cfg) {
  fs.validate();
  if (cfg.n_coeffs < 1) throw UsageError("CoeffConfig: n_coeffs must be >= 1");
  const Eigen::Index n = fs.values.rows();

  if (!cfg.tensor2d) {
    const Vec w = trapezoid_weights(fs.grid);
    Mat out(n, cfg.n_coeffs);
    for (int j = 1; j <= cfg.n_coeffs; ++j) {
      const Vec uw = cosine_on_grid(fs.grid, j).cwiseProduct(w);
      out.col(j - 1) = fs.values * uw;
    }
    return out;
  }

  check_tensor_cfg(fs, cfg);
  const int k = int(std::lround(std::sqrt(double(cfg.n_coeffs))));
  const Vec gr = unit_grid(cfg.rows), gc = unit_grid(cfg.cols);
  const Vec wr = trapezoid_weights(gr), wc = trapezoid_weights(gc);
  Mat out(n, cfg.n_coeffs);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec rowv = fs.values.row(i).transpose();
    // Row-major grid flattening viewed as a (cols x rows) column-major map.
    Eigen::Map<const Mat> F(rowv.data(), cfg.cols, cfg.rows);
    for (int j1 = 1; j1 <= k; ++j1) {
      const Vec ur = cosine_on_grid(gr, j1).cwiseProduct(wr);
      for (int j2 = 1; j2 <= k; ++j2) {
        const Vec uc = cosine_on_grid(gc, j2).cwiseProduct(wc);
        out(i, (j1 - 1) * k + (j2 - 1)) = ur.dot(F.transpose() * uc);
      }
    }
  }
  return out;
}

Mat to_coeffs(const FunctionSample& fs, const CoeffConfig& cfg) {
  Mat raw = raw_cosine_coeffs(fs, cfg);
  Mat w = (cfg.c1 * raw.array() + cfg.c2).matrix();
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      if (w(i, j) < 0.0 || w(i, j) > 1.0) {
        std::ostringstream os;
        os << "to_coeffs: coefficient (" << i << ", " << j + 1 << ") = " << w(i, j)
           << " is outside [0,1]; recalibrate c1/c2";
        throw NumericalError(os.str());
      }
  return w;
}

FunctionSample from_coeffs(const Mat& coeffs, const CoeffConfig& cfg, const Vec& grid) {
  if (cfg.c1 == 0) throw UsageError("from_coeffs: c1 must be nonzero");
  if (coeffs.cols() != cfg.n_coeffs) throw UsageError("from_coeffs: coefficient width mismatch");
  const Mat theta = ((coeffs.array() - cfg.c2) / cfg.c1).matrix();

  FunctionSample out;
  out.grid = grid;
  if (!cfg.tensor2d) {
    Mat U(cfg.n_coeffs, grid.size());
    for (int j = 1; j <= cfg.n_coeffs; ++j) U.row(j - 1) = cosine_on_grid(grid, j).transpose();
    out.values = theta * U;
  } else {
    const int k = int(std::lround(std::sqrt(double(cfg.n_coeffs))));
    const Vec gr = unit_grid(cfg.rows), gc = unit_grid(cfg.cols);
    out.values.resize(coeffs.rows(), Eigen::Index(cfg.rows) * cfg.cols);
    for (Eigen::Index i = 0; i < coeffs.rows(); ++i) {
      Mat F = Mat::Zero(cfg.rows, cfg.cols);
      for (int j1 = 1; j1 <= k; ++j1)
        for (int j2 = 1; j2 <= k; ++j2)
          F += theta(i, (j1 - 1) * k + (j2 - 1)) *
               (cosine_on_grid(gr, j1) * cosine_on_grid(gc, j2).transpose());
      for (int r = 0; r < cfg.rows; ++r)
        out.values.block(i, Eigen::Index(r) * cfg.cols, 1, cfg.cols) = F.row(r);
    }
  }
  out.validate();
  return out;
}

CoeffConfig calibrate_scaling(const FunctionSample& fs, int n_coeffs, double margin,
                              bool tensor2d, int rows, int cols) {
  if (margin < 0 || margin >= 0.5) throw UsageError("calibrate_scaling: margin must be in [0, 0.5)");
  CoeffConfig cfg;
  cfg.n_coeffs = n_coeffs;
  cfg.tensor2d = tensor2d;
  cfg.rows = rows;
  cfg.cols = cols;
  const Mat raw = raw_cosine_coeffs(fs, cfg);
  const double lo = raw.minCoeff(), hi = raw.maxCoeff();
  const double span = hi - lo;
  if (span <= 0) {
    cfg.c1 = 1.0;
    cfg.c2 = 0.5 - lo;  // constant coefficients land mid-interval
  } else {
    cfg.c1 = (1.0 - 2.0 * margin) / span;
    cfg.c2 = margin - cfg.c1 * lo;
  }
  return cfg;
}

FunctionSample transport_functions(const FunctionSample& fs, const TransportFn& estimator,
                                   const CoeffConfig& cfg) {
  const Mat W = to_coeffs(fs, cfg);
  Mat out(W.rows(), W.cols());
  for (Eigen::Index i = 0; i < W.rows(); ++i)
    out.row(i) = estimator(W.row(i).transpose()).transpose();
  return from_coeffs(out, cfg, fs.grid);
}

double dtw_distance(const Vec& a, const Vec& b) {
  const Eigen::Index na = a.size(), nb = b.size();
  if (na == 0 || nb == 0) throw UsageError("dtw_distance: empty series");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  Vec prev = Vec::Constant(nb, kInf), cur(nb);
  for (Eigen::Index i = 0; i < na; ++i) {
    for (Eigen::Index j = 0; j < nb; ++j) {
      const double cost = square(a[i] - b[j]);
      double best;
      if (i == 0 && j == 0)
        best = 0;
      else if (i == 0)
        best = cur[j - 1];
      else if (j == 0)
        best = prev[j];
      else
        best = std::min({prev[j], cur[j - 1], prev[j - 1]});
      cur[j] = cost + best;
    }
    std::swap(prev, cur);
  }
  return prev[nb - 1];
}

double avg_dtw(const FunctionSample& A, const FunctionSample& B) {
  A.validate();
  B.validate();
  if (A.values.cols() != B.values.cols())
    throw UsageError("avg_dtw: grids must have equal length");
  double acc = 0;
  for (Eigen::Index g = 0; g < A.values.cols(); ++g)
    acc += dtw_distance(A.values.col(g), B.values.col(g));
  return acc / double(A.values.cols());
}

}  // namespace otmap
