#include "otmap/mlp.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace otmap {

namespace {
constexpr double kPi = 3.1415926535897932384626433832795;
}

MlpPotential::MlpPotential(int input_dim, std::vector<int> hidden, int embed_dim, double bound_B,
                           std::uint64_t seed)
    : input_dim_(input_dim), embed_dim_(embed_dim), bound_B_(bound_B) {
  if (input_dim < 1) throw UsageError("MlpPotential: input_dim must be >= 1");
  if (hidden.empty()) throw UsageError("MlpPotential: need at least one hidden layer");
  if (bound_B <= 0) throw UsageError("MlpPotential: bound B must be positive");

  Rng rng = Rng::stream(seed, 0x6d6c70 /* "mlp" */);
  const int in_eff = embed_dim_ > 0 ? input_dim_ * embed_dim_ : input_dim_;
  if (embed_dim_ > 0) {
    theta_.resize(input_dim_, embed_dim_);
    for (int i = 0; i < input_dim_; ++i)
      for (int j = 0; j < embed_dim_; ++j) theta_(i, j) = rng.normal();
  }

  std::vector<int> dims;
  dims.push_back(in_eff);
  for (int h : hidden) {
    if (h < 1) throw UsageError("MlpPotential: hidden widths must be >= 1");
    dims.push_back(h);
  }
  dims.push_back(1);

  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Mat W(dims[l + 1], dims[l]);
    const bool output_layer = (l + 2 == dims.size());
    const double scale = std::sqrt(2.0 / double(dims[l]));
    for (Eigen::Index r = 0; r < W.rows(); ++r)
      for (Eigen::Index c = 0; c < W.cols(); ++c)
        W(r, c) = output_layer ? 0.0 : scale * rng.normal();
    W_.push_back(std::move(W));
    b_.push_back(Vec::Zero(dims[l + 1]));
  }
  clamp_params();
}

std::size_t MlpPotential::num_params() const {
  std::size_t n = std::size_t(theta_.size());
  for (const auto& W : W_) n += std::size_t(W.size());
  for (const auto& b : b_) n += std::size_t(b.size());
  return n;
}

std::size_t MlpPotential::nonzero_params() const {
  std::size_t n = 0;
  for (Eigen::Index i = 0; i < theta_.size(); ++i) n += theta_.data()[i] != 0.0;
  for (const auto& W : W_)
    for (Eigen::Index i = 0; i < W.size(); ++i) n += W.data()[i] != 0.0;
  for (const auto& b : b_)
    for (Eigen::Index i = 0; i < b.size(); ++i) n += b[i] != 0.0;
  return n;
}

Mat MlpPotential::embed(const Mat& X) const {
  if (embed_dim_ <= 0) return X;
  Mat out(X.rows(), Eigen::Index(input_dim_) * embed_dim_);
  for (int i = 0; i < input_dim_; ++i)
    out.middleCols(Eigen::Index(i) * embed_dim_, embed_dim_) = X.col(i) * theta_.row(i);
  return out;
}

void MlpPotential::value_batch(const Mat& X, Vec& val) const {
  if (X.cols() != input_dim_) throw UsageError("MlpPotential: input dimension mismatch");
  Mat A = embed(X);
  const std::size_t L = W_.size();
  for (std::size_t l = 0; l + 1 < L; ++l) {
    A = ((A * W_[l].transpose()).rowwise() + b_[l].transpose()).cwiseMax(0.0);
  }
  val = (A * W_[L - 1].transpose()).col(0).array() + b_[L - 1][0];
}

double MlpPotential::forward(const Vec& x) const {
  Vec v;
  value_batch(x.transpose(), v);
  return v[0];
}

void MlpPotential::value_and_input_grad(const Mat& X, Vec& val, Mat& grad) const {
  if (X.cols() != input_dim_) throw UsageError("MlpPotential: input dimension mismatch");
  const std::size_t L = W_.size();
  std::vector<Mat> acts(L);  // post-ReLU activations, acts[0] = embedded input
  acts[0] = embed(X);
  std::vector<Mat> masks(L - 1);  // ReLU'(z), indicator z >= 0
  for (std::size_t l = 0; l + 1 < L; ++l) {
    Mat Z = (acts[l] * W_[l].transpose()).rowwise() + b_[l].transpose();
    masks[l] = (Z.array() >= 0.0).cast<double>().matrix();
    acts[l + 1] = Z.cwiseMax(0.0);
  }
  val = (acts[L - 1] * W_[L - 1].transpose()).col(0).array() + b_[L - 1][0];

  // Reverse sweep: G holds dval/d(post-activation of layer l).
  Mat G = W_[L - 1].replicate(X.rows(), 1);
  for (std::size_t l = L - 1; l-- > 0;) G = (G.cwiseProduct(masks[l])) * W_[l];
  // G is now dval/d(embedded input).
  if (embed_dim_ > 0) {
    grad.resize(X.rows(), input_dim_);
    for (int i = 0; i < input_dim_; ++i)
      grad.col(i) =
          G.middleCols(Eigen::Index(i) * embed_dim_, embed_dim_) * theta_.row(i).transpose();
  } else {
    grad = std::move(G);
  }
}

Vec MlpPotential::input_grad(const Vec& x) const {
  Vec v;
  Mat g;
  value_and_input_grad(x.transpose(), v, g);
  return g.row(0).transpose();
}

MlpPotential::ParamGrad MlpPotential::param_grad(const Mat& X, const Vec& c) const {
  if (X.cols() != input_dim_) throw UsageError("MlpPotential: input dimension mismatch");
  if (c.size() != X.rows()) throw UsageError("MlpPotential: coefficient count mismatch");
  const std::size_t L = W_.size();
  std::vector<Mat> acts(L);
  acts[0] = embed(X);
  std::vector<Mat> masks(L - 1);
  for (std::size_t l = 0; l + 1 < L; ++l) {
    Mat Z = (acts[l] * W_[l].transpose()).rowwise() + b_[l].transpose();
    masks[l] = (Z.array() >= 0.0).cast<double>().matrix();
    acts[l + 1] = Z.cwiseMax(0.0);
  }

  ParamGrad g;
  g.W.resize(L);
  g.b.resize(L);

  // Delta holds d(sum_r c_r val_r)/d(pre-activation of layer l).
  Mat Delta = c;  // rows x 1, output layer is linear
  for (std::size_t l = L; l-- > 0;) {
    g.W[l] = Delta.transpose() * acts[l];
    g.b[l] = Delta.colwise().sum().transpose();
    if (l > 0) Delta = (Delta * W_[l]).cwiseProduct(masks[l - 1]);
  }
  if (embed_dim_ > 0) {
    // Delta holds d/dZ_0; one more product reaches the embedded input.
    const Mat Ginput = Delta * W_[0];
    g.theta = Mat::Zero(input_dim_, embed_dim_);
    for (int i = 0; i < input_dim_; ++i)
      g.theta.row(i) =
          (Ginput.middleCols(Eigen::Index(i) * embed_dim_, embed_dim_).array() *
           X.col(i).replicate(1, embed_dim_).array())
              .colwise()
              .sum();
  }
  return g;
}

void MlpPotential::apply_update(const ParamGrad& g, double step) {
  if (embed_dim_ > 0) theta_ -= step * g.theta;
  for (std::size_t l = 0; l < W_.size(); ++l) {
    W_[l] -= step * g.W[l];
    b_[l] -= step * g.b[l];
  }
  clamp_params();
}

void MlpPotential::clamp_params() {
  const double B = bound_B_;
  auto clamp = [B](auto& M) { M = M.cwiseMax(-B).cwiseMin(B); };
  if (embed_dim_ > 0) clamp(theta_);
  for (auto& W : W_) clamp(W);
  for (auto& b : b_) clamp(b);
}

void MlpBrenier::value_and_grad(const Mat& X, Vec& values, Mat& grads) const {
  Vec nn_val;
  Mat nn_grad;
  net_.value_and_input_grad(X, nn_val, nn_grad);
  values = 0.5 * X.rowwise().squaredNorm() - nn_val;
  values.array() += mean_offset_;
  grads = X - nn_grad;
}

Vec transport_nn(const MlpPotential& net, const Vec& x_full) {
  const int dm = net.input_dim();
  if (x_full.size() < dm) throw UsageError("transport_nn: point dimension below d_max");
  const Vec xt = x_full.head(dm);
  Vec mapped = clip01(xt - net.input_grad(xt));
  Vec out = x_full;  // trailing coordinates pass through unchanged
  out.head(dm) = mapped;
  return out;
}

namespace {

double effective_q(const SmoothnessMap& map) {
  switch (map.family()) {
    case SmoothnessMap::Family::SobolevDK:
      return std::numeric_limits<double>::infinity();
    case SmoothnessMap::Family::Mixed:
    case SmoothnessMap::Family::Anisotropic: {
      const auto& w = map.weights();
      if (w.kind == WeightRule::Kind::Geometric) return std::numeric_limits<double>::infinity();
      return std::max(w.q, 0.25);
    }
  }
  return 1.0;
}

}  // namespace

NnConfig nn_default_config(const SmoothnessMap& map, std::size_t n, const std::string& preset) {
  if (preset != "theory" && preset != "sim7")
    throw UsageError("nn_default_config: unknown preset '" + preset + "'");
  const double alpha = map.alpha();
  if (!std::isfinite(alpha)) throw UsageError("nn_default_config: alpha(gamma) is infinite");

  NnConfig cfg;
  cfg.J = select_J(map, n);
  cfg.d_max = d_max(map, double(cfg.J));
  const double q = effective_q(map);
  const double J = double(cfg.J);
  const double Jq = std::isinf(q) ? 1.0 : std::pow(J, 1.0 / q);

  // Theorem shapes with desk-scale clamps: the proportionality constants are
  // calibrated so W <= 512 and at most 7 hidden layers at n <= 1e4.
  const double W_raw = Jq * std::exp2(alpha * J / (1.0 + 2.0 * alpha));
  const int W = int(std::clamp(std::round(0.5 * W_raw), 16.0, 512.0));
  const double L_raw = std::isinf(q) ? J * J : std::pow(J, 2.0 + 2.0 / q);
  const int layers = int(std::clamp(std::round(0.5 + 2.8e-4 * L_raw), 2.0, 7.0));
  cfg.hidden.assign(std::size_t(layers), W);
  cfg.bound_B = std::clamp(std::exp2(Jq / 2.0), 4.0, 1024.0);
  const double R_raw = (std::isinf(q) ? J * J : std::pow(J, 2.0 + 4.0 / q)) *
                       std::exp2(alpha * J / (1.0 + 2.0 * alpha));
  cfg.sparsity_R = R_raw;

  cfg.lr = 1e-2;
  cfg.batch = int(std::min<std::size_t>(100, n));
  cfg.iterations = int(175 * ((n + std::size_t(cfg.batch) - 1) / std::size_t(cfg.batch)));
  cfg.embed_dim = preset == "sim7" ? 20 : 0;
  return cfg;
}

NnFit train_nn(const Mat& X, const Mat& Y, const SmoothnessMap& map, NnConfig cfg) {
  const int n = int(X.rows());
  if (n == 0) throw UsageError("train_nn: empty sample");
  if (Y.rows() != n || Y.cols() != X.cols())
    throw UsageError("train_nn: X and Y must have equal shape");
  const double alpha = map.alpha();
  if (!std::isfinite(alpha)) throw UsageError("train_nn: alpha(gamma) is infinite");

  if (cfg.J == 0) cfg.J = select_J(map, std::size_t(n));
  int dm = cfg.d_max > 0 ? cfg.d_max : d_max(map, double(cfg.J));
  dm = std::max(1, std::min<int>(dm, int(X.cols())));
  cfg.d_max = dm;
  if (cfg.hidden.empty()) {
    NnConfig def = nn_default_config(map, std::size_t(n), cfg.embed_dim > 0 ? "sim7" : "theory");
    cfg.hidden = def.hidden;
    if (cfg.sparsity_R == 0) cfg.sparsity_R = def.sparsity_R;
  }
  cfg.batch = std::max(1, std::min(cfg.batch, n));

  NnFit fit;
  fit.net = MlpPotential(dm, cfg.hidden, cfg.embed_dim, cfg.bound_B, cfg.seed);
  fit.d_max = dm;

  const Mat Xt = X.leftCols(dm);
  const Mat Yt = Y.leftCols(dm);
  Mat warm = Yt.cwiseMax(0.0).cwiseMin(1.0);  // per-sample conjugate warm starts

  Rng shuffle_rng = Rng::stream(cfg.seed, 0x736866 /* "shf" */);
  std::vector<int> order = shuffle_rng.permutation(n);
  int pos = 0;
  const int b = cfg.batch;
  double initial_objective = 0;

  for (int t = 0; t < cfg.iterations; ++t) {
    const double lr_t = cfg.lr * 0.5 * (1.0 + std::cos(kPi * double(t) / double(cfg.iterations)));

    if (pos + b > n) {
      order = shuffle_rng.permutation(n);
      pos = 0;
    }
    Mat Xb(b, dm), Yb(b, dm), Wb(b, dm);
    for (int i = 0; i < b; ++i) {
      Xb.row(i) = Xt.row(order[std::size_t(pos + i)]);
      Yb.row(i) = Yt.row(order[std::size_t(pos + i)]);
      Wb.row(i) = warm.row(order[std::size_t(pos + i)]);
    }

    // Mean-centering of the Kantorovich potential over the batch.
    Vec val_X;
    fit.net.value_batch(Xb, val_X);
    const double mu = val_X.mean();
    MlpBrenier pot(fit.net, mu);

    // Conjugate argmaxes: warm start plus clip(y), best of the two per point.
    Mat starts(2 * b, dm);
    starts.topRows(b) = Wb;
    starts.bottomRows(b) = Yb.cwiseMax(0.0).cwiseMin(1.0);
    Mat Ystack(2 * b, dm);
    Ystack.topRows(b) = Yb;
    Ystack.bottomRows(b) = Yb;
    RowAscentResult conj =
        projected_ascent_rows(pot, Ystack, starts, cfg.conj_tol, cfg.conj_max_iter);

    Mat xstar(b, dm);
    double conj_mean = 0;
    for (int i = 0; i < b; ++i) {
      const bool first = conj.value[i] >= conj.value[b + i];
      xstar.row(i) = first ? conj.argmax.row(i) : conj.argmax.row(b + i);
      conj_mean += first ? conj.value[i] : conj.value[b + i];
      warm.row(order[std::size_t(pos + i)]) = xstar.row(i);
    }
    conj_mean /= double(b);

    const double objective = 0.5 * Xb.rowwise().squaredNorm().mean() + conj_mean;
    if (t == 0) initial_objective = objective;
    if (!std::isfinite(objective) ||
        objective > 10.0 * std::abs(initial_objective) + 1.0) {
      std::ostringstream os;
      os << "train_nn: diverged at step " << t << " (objective " << objective << ", initial "
         << initial_objective << ", lr " << lr_t << ")";
      throw NumericalError(os.str());
    }
    fit.objective_trace.push_back(objective);

    // Danskin step: d/dtheta [mean phi(x*) - mean phi(X_batch)] with x* fixed.
    Mat Xcat(2 * b, dm);
    Xcat.topRows(b) = xstar;
    Xcat.bottomRows(b) = Xb;
    Vec c(2 * b);
    c.head(b).setConstant(1.0 / double(b));
    c.tail(b).setConstant(-1.0 / double(b));
    fit.net.apply_update(fit.net.param_grad(Xcat, c), lr_t);

    pos += b;
  }

  fit.config = cfg;
  return fit;
}

}  // namespace otmap
