#include "otmap/experiments.hpp"

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>

#include "otmap/assignment.hpp"
#include "otmap/fourier.hpp"
#include "otmap/mlp.hpp"
#include "otmap/semidual.hpp"

namespace otmap {

namespace {

double now_sec() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

Mat sample_uniform(int n, int d, std::uint64_t seed) {
  Mat out(n, d);
  for (int i = 0; i < n; ++i) {
    Rng rng = Rng::stream(seed, std::uint64_t(i));
    for (int j = 0; j < d; ++j) out(i, j) = rng.uniform();
  }
  return out;
}

}  // namespace

double HockeyStickMap::eval1(int axis, double x) const {
  const double k = kappa(axis);
  const double raw = x - std::pow(std::abs(x - 0.5), k) / k;
  return std::min(1.0, std::max(0.0, raw));
}

Vec HockeyStickMap::eval(const Vec& x) const {
  if (x.size() != d) throw UsageError("HockeyStickMap: dimension mismatch");
  Vec out(d);
  for (int i = 0; i < d; ++i) out[i] = eval1(i + 1, x[i]);
  return out;
}

std::pair<Mat, Mat> gen_pushforward_data(const HockeyStickMap& map, int n, std::uint64_t seed) {
  if (n < 1) throw UsageError("gen_pushforward_data: n must be >= 1");
  Mat X = sample_uniform(n, map.d, combine_seed(seed, 0x5853 /* "XS" */));
  Mat U = sample_uniform(n, map.d, combine_seed(seed, 0x5953 /* "YS" */));
  Mat Y(n, map.d);
  for (int i = 0; i < n; ++i) Y.row(i) = map.eval(U.row(i).transpose()).transpose();
  return {std::move(X), std::move(Y)};
}

McError l2_error(const TransportFn& t_hat, const TransportFn& t0, int d, int m,
                 std::uint64_t seed) {
  if (m < 1) throw UsageError("l2_error: m must be >= 1");
  double acc = 0, acc2 = 0;
  Rng rng = Rng::stream(seed, 0x6d63 /* "mc" */);
  for (int j = 0; j < m; ++j) {
    const Vec u = rng.uniform_vec(d);
    const double e = (t_hat(u) - t0(u)).squaredNorm();
    acc += e;
    acc2 += e * e;
  }
  McError out;
  out.value = acc / double(m);
  const double var = std::max(0.0, acc2 / double(m) - out.value * out.value);
  out.se = std::sqrt(var / double(m));
  return out;
}

std::pair<double, double> fit_loglog_line(const std::vector<int>& ns,
                                          const std::vector<double>& errors) {
  if (ns.size() != errors.size() || ns.size() < 2)
    throw UsageError("fit_loglog_line: need >= 2 (n, error) pairs");
  const double m = double(ns.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (errors[i] <= 0) throw UsageError("fit_loglog_line: errors must be positive");
    const double x = std::log(double(ns[i]));
    const double y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = m * sxx - sx * sx;
  if (std::abs(denom) < 1e-12) throw UsageError("fit_loglog_line: degenerate n values");
  const double slope = (m * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / m;
  return {slope, intercept};
}

namespace {

Mat matrix_sqrt_psd(const Mat& M) {
  Eigen::SelfAdjointEigenSolver<Mat> es(M);
  Vec lam = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * lam.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

Mat matrix_inv_sqrt_psd(const Mat& M) {
  Eigen::SelfAdjointEigenSolver<Mat> es(M);
  Vec lam = es.eigenvalues().cwiseMax(1e-300);
  return es.eigenvectors() * lam.cwiseSqrt().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

Mat covariance(const Mat& X) {
  const Mat centered = X.rowwise() - X.colwise().mean();
  return centered.transpose() * centered / double(X.rows());
}

}  // namespace

LinearOtMap linear_ot_baseline(const Mat& X, const Mat& Y, double ridge) {
  if (X.rows() < 2 || Y.rows() < 2) throw UsageError("linear_ot_baseline: need >= 2 samples");
  if (X.cols() != Y.cols()) throw UsageError("linear_ot_baseline: dimension mismatch");
  const int d = int(X.cols());
  LinearOtMap map;
  map.mean_x = X.colwise().mean().transpose();
  map.mean_y = Y.colwise().mean().transpose();
  const Mat Sx = covariance(X) + ridge * Mat::Identity(d, d);
  const Mat Sy = covariance(Y) + ridge * Mat::Identity(d, d);
  const Mat Sx_half = matrix_sqrt_psd(Sx);
  const Mat Sx_ihalf = matrix_inv_sqrt_psd(Sx);
  const Mat inner = matrix_sqrt_psd(Sx_half * Sy * Sx_half);
  map.A = Sx_ihalf * inner * Sx_ihalf;
  return map;
}

std::string to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::Fourier: return "fourier";
    case EstimatorKind::Nn: return "nn";
    case EstimatorKind::NnPlan: return "nnplan";
    case EstimatorKind::Linear: return "linear";
  }
  return "?";
}

EstimatorKind estimator_from_string(const std::string& s) {
  if (s == "fourier") return EstimatorKind::Fourier;
  if (s == "nn") return EstimatorKind::Nn;
  if (s == "nnplan") return EstimatorKind::NnPlan;
  if (s == "linear") return EstimatorKind::Linear;
  throw UsageError("unknown estimator '" + s + "'");
}

namespace {

SmoothnessMap study_map(const StudyConfig& cfg) {
  if (cfg.map) return *cfg.map;
  // Mixed-smooth rule matching the hockey-stick family: a_1 = q - 0.4 and
  // polynomial growth with exponent 0.1 q across axes.
  const double c = std::max(cfg.q - 0.4, 0.1);
  return SmoothnessMap::mixed(WeightRule::power(c, 0.1 * cfg.q));
}

Mat sample_source(const StudyConfig& cfg, int n, std::uint64_t seed) {
  if (cfg.ellipsoid_b > 0) return sample_sobolev_ellipsoid(cfg.ellipsoid_b, cfg.d, n, seed);
  return sample_uniform(n, cfg.d, seed);
}

}  // namespace

ExperimentReport convergence_study(const StudyConfig& cfg) {
  if (cfg.ns.empty()) throw UsageError("convergence_study: ns must be nonempty");
  if (cfg.num_seeds < 1) throw UsageError("convergence_study: num_seeds must be >= 1");
  const double t_start = now_sec();

  const SmoothnessMap map = study_map(cfg);
  const HockeyStickMap truth{cfg.d, cfg.q};
  const TransportFn t0 = [&truth](const Vec& x) { return truth.eval(x); };

  ExperimentReport report;
  report.config = cfg;
  const double a1 = cfg.q - 0.4;
  report.theory_exponent = -2.0 * a1 / (2.0 * a1 + 1.0);

  for (int n : cfg.ns) {
    double err_sum = 0;
    for (int s = 0; s < cfg.num_seeds; ++s) {
      const std::uint64_t run_seed = combine_seed(cfg.seed, combine_seed(std::uint64_t(n), s));
      const double t_run = now_sec();

      const Mat X = sample_source(cfg, n, combine_seed(run_seed, 0x5853));
      const Mat U = sample_source(cfg, n, combine_seed(run_seed, 0x5953));
      Mat Y(n, cfg.d);
      for (int i = 0; i < n; ++i) Y.row(i) = truth.eval(U.row(i).transpose()).transpose();

      TransportFn t_hat;
      // Holders keep fitted objects alive inside the callable.
      switch (cfg.estimator) {
        case EstimatorKind::Fourier: {
          SemidualConfig sc;
          sc.seed = run_seed;
          sc.threads = cfg.threads;
          auto fit = std::make_shared<SemidualFit>(fit_fourier(X, Y, map, sc));
          t_hat = [fit](const Vec& x) { return fourier_transport(*fit, x); };
          break;
        }
        case EstimatorKind::Nn: {
          NnConfig nc = nn_default_config(map, std::size_t(n), cfg.nn_preset);
          nc.seed = run_seed;
          nc.threads = cfg.threads;
          auto fit = std::make_shared<NnFit>(train_nn(X, Y, map, nc));
          t_hat = [fit](const Vec& x) { return transport_nn(fit->net, x); };
          break;
        }
        case EstimatorKind::NnPlan: {
          auto plan = std::make_shared<TransportPlan>(solve_assignment(X, Y));
          auto Xc = std::make_shared<Mat>(X);
          auto Yc = std::make_shared<Mat>(Y);
          t_hat = [plan, Xc, Yc](const Vec& x) { return nn_transport(*plan, *Xc, *Yc, x); };
          break;
        }
        case EstimatorKind::Linear: {
          auto lin = std::make_shared<LinearOtMap>(linear_ot_baseline(X, Y));
          t_hat = [lin](const Vec& x) { return lin->apply(x); };
          break;
        }
      }

      McError err{};
      if (cfg.ellipsoid_b > 0) {
        // Error against the source measure: average over fresh source draws.
        const Mat probes =
            sample_source(cfg, cfg.mc_points, combine_seed(run_seed, 0x4d43 /* "MC" */));
        double acc = 0, acc2 = 0;
        for (int j = 0; j < cfg.mc_points; ++j) {
          const Vec u = probes.row(j).transpose();
          const double e = (t_hat(u) - t0(u)).squaredNorm();
          acc += e;
          acc2 += e * e;
        }
        err.value = acc / double(cfg.mc_points);
        err.se = std::sqrt(std::max(0.0, acc2 / cfg.mc_points - err.value * err.value) /
                           cfg.mc_points);
      } else {
        err = l2_error(t_hat, t0, cfg.d, cfg.mc_points, combine_seed(run_seed, 0x4d43));
      }

      RunRecord rec;
      rec.estimator = to_string(cfg.estimator);
      rec.q = cfg.q;
      rec.d = cfg.d;
      rec.n = n;
      rec.seed = run_seed;
      rec.error = err.value;
      rec.se = err.se;
      rec.runtime_sec = now_sec() - t_run;
      report.runs.push_back(rec);
      err_sum += err.value;
    }
    report.mean_errors.push_back(err_sum / double(cfg.num_seeds));
  }

  if (cfg.ns.size() >= 2) {
    auto [slope, intercept] = fit_loglog_line(cfg.ns, report.mean_errors);
    report.has_slope = true;
    report.slope = slope;
    report.intercept = intercept;
  }
  report.runtime_sec = now_sec() - t_start;
  return report;
}

LowerBoundFixture lower_bound_fixture(int d, int S, const SmoothnessMap& map, int K,
                                      std::uint64_t seed, int mc_points) {
  if (d < 1 || S < 1 || K < 2) throw UsageError("lower_bound_fixture: need d,S >= 1 and K >= 2");
  if (std::uint64_t(d) * std::uint64_t(S) > 24)
    throw UsageError("lower_bound_fixture: 2^(dS) too large for the fixture");

  LowerBoundFixture fx;
  fx.d = d;
  fx.S = S;
  fx.K = K;
  fx.M = 1 << (d * S);
  fx.seed = seed;
  fx.mc_points = mc_points;

  DyadicScale diag([&] {
    std::vector<DyadicScale::Entry> es;
    for (int i = 1; i <= d; ++i) es.push_back({i, S});
    return es;
  }());
  fx.gamma_S = map.gamma(diag);

  // I(S) - {0}: l in {0..2^S-1}^d, cosine products (negative entries in the
  // sign convention of the trigonometric basis).
  const int side = 1 << S;
  std::vector<FrequencyIndex> freqs;
  std::vector<double> coeff;
  std::vector<double> gamma_of_l;
  std::vector<int> counter(std::size_t(d), 0);
  const double const_factor = 1.0 / square(2.0 * std::sqrt(2.0) * M_PI);  // (2 sqrt2 pi)^-2
  for (;;) {
    // odometer over {0..side-1}^d
    int a = d - 1;
    while (a >= 0 && counter[std::size_t(a)] == side - 1) {
      counter[std::size_t(a)] = 0;
      --a;
    }
    if (a < 0) break;
    ++counter[std::size_t(a)];

    std::vector<FrequencyIndex::Entry> entries;
    std::vector<DyadicScale::Entry> sent;
    double norm2 = 0;
    for (int i = 0; i < d; ++i) {
      const int li = counter[std::size_t(i)];
      if (li == 0) continue;
      entries.push_back({i + 1, -li});  // cosine factor
      sent.push_back({i + 1, int(std::floor(std::log2(double(li)))) + 1});
      norm2 += double(li) * double(li);
    }
    freqs.emplace_back(std::move(entries));
    gamma_of_l.push_back(map.gamma(DyadicScale(std::move(sent))));
    coeff.push_back(const_factor * std::exp2(-fx.gamma_S) / std::sqrt(double(fx.M)) /
                    std::sqrt(norm2));
  }

  // Binary codes with pairwise Hamming >= M/8 by rejection sampling. Codes
  // index I(S)-{0} only: a slot for the null function would let two codes
  // differ without separating the potentials.
  const int code_len = fx.M - 1;
  const int min_ham = std::max(1, (fx.M + 7) / 8);
  std::vector<std::vector<int>> codes;
  Rng rng = Rng::stream(seed, 0x7667 /* "vg" */);
  int tries = 0;
  while (int(codes.size()) < K) {
    if (++tries > 100000)
      throw NumericalError("lower_bound_fixture: could not generate codes with the required "
                           "Hamming separation");
    std::vector<int> cand(std::size_t(code_len), 0);
    for (auto& b : cand) b = int(rng.uniform_index(2));
    bool ok = true;
    for (const auto& c : codes) {
      int ham = 0;
      for (int j = 0; j < code_len; ++j) ham += cand[std::size_t(j)] != c[std::size_t(j)];
      if (ham < min_ham) {
        ok = false;
        break;
      }
    }
    if (ok) codes.push_back(std::move(cand));
  }

  // Exact coefficient-space quantities. Gradients of distinct basis terms are
  // L^2-orthogonal, so both reduce to finite sums over I(S)-{0}.
  constexpr double kTwoPiSq = 4.0 * M_PI * M_PI;
  fx.coeff_sum = 0;
  std::vector<double> grad_mass(freqs.size());  // (2 pi)^2 ||l||^2 c_l^2
  for (std::size_t t = 0; t < freqs.size(); ++t) {
    double norm2 = 0;
    for (const auto& e : freqs[t].entries) norm2 += double(e.freq) * double(e.freq);
    grad_mass[t] = kTwoPiSq * norm2 * coeff[t] * coeff[t];
    fx.coeff_sum += std::exp2(2.0 * gamma_of_l[t]) * grad_mass[t];
  }

  // Code slot t belongs to freqs[t].
  fx.hamming_min = fx.M;
  double sep_min_exact = std::numeric_limits<double>::infinity();
  for (int m = 0; m < K; ++m) {
    for (int m2 = m + 1; m2 < K; ++m2) {
      int ham = 0;
      double sep = 0;
      for (std::size_t t = 0; t < freqs.size(); ++t) {
        if (codes[std::size_t(m)][t] != codes[std::size_t(m2)][t]) {
          ++ham;
          sep += grad_mass[t];
        }
      }
      fx.hamming_min = std::min(fx.hamming_min, ham);
      sep_min_exact = std::min(sep_min_exact, sep);
    }
  }
  fx.sep_min_exact = sep_min_exact;

  // Monte Carlo separations.
  Rng mc_rng = Rng::stream(seed, 0x6d6370 /* "mcp" */);
  std::vector<double> pair_acc(std::size_t(K) * std::size_t(K), 0.0);
  Vec grad_l(d);
  Mat grads(K, d);
  for (int p = 0; p < mc_points; ++p) {
    const Vec u = mc_rng.uniform_vec(d);
    grads.setZero();
    for (std::size_t t = 0; t < freqs.size(); ++t) {
      grad_l = basis_grad(freqs[t], u) * coeff[t];
      for (int m = 0; m < K; ++m)
        if (codes[std::size_t(m)][t]) grads.row(m) += grad_l.transpose();
    }
    for (int m = 0; m < K; ++m)
      for (int m2 = m + 1; m2 < K; ++m2)
        pair_acc[std::size_t(m) * std::size_t(K) + std::size_t(m2)] +=
            (grads.row(m) - grads.row(m2)).squaredNorm();
  }
  fx.sep_min_measured = std::numeric_limits<double>::infinity();
  fx.sep_max_measured = 0;
  for (int m = 0; m < K; ++m)
    for (int m2 = m + 1; m2 < K; ++m2) {
      const double v = pair_acc[std::size_t(m) * std::size_t(K) + std::size_t(m2)] / mc_points;
      fx.sep_min_measured = std::min(fx.sep_min_measured, v);
      fx.sep_max_measured = std::max(fx.sep_max_measured, v);
    }
  return fx;
}

}  // namespace otmap
