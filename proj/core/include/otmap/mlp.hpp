#pragma once

#include <vector>

#include "otmap/conjugate.hpp"
#include "otmap/gamma.hpp"

namespace otmap {

// Coordinate truncation iota: [0,1]^inf -> [0,1]^{d_max} and its zero-padding
// pseudo-inverse.
struct Truncation {
  int d_max = 1;
  Vec forward(const Vec& x) const { return x.head(std::min<Eigen::Index>(d_max, x.size())); }
  Vec inverse(const Vec& z, int full_dim) const {
    Vec out = Vec::Zero(full_dim);
    out.head(z.size()) = z;
    return out;
  }
};

// ReLU feed-forward Kantorovich potential on [0,1]^{input_dim} with an
// optional multi-direction embedding x'_{ij} = theta_{ij} x_i ahead of the
// dense stack. All parameters are clamped to [-B, B] after every update.
class MlpPotential {
 public:
  MlpPotential() = default;
  MlpPotential(int input_dim, std::vector<int> hidden, int embed_dim, double bound_B,
               std::uint64_t seed);

  int input_dim() const { return input_dim_; }
  int embed_dim() const { return embed_dim_; }
  double bound() const { return bound_B_; }
  const std::vector<Mat>& weights() const { return W_; }
  const std::vector<Vec>& biases() const { return b_; }
  const Mat& embedding() const { return theta_; }
  Mat& mutable_embedding() { return theta_; }
  std::vector<Mat>& mutable_weights() { return W_; }
  std::vector<Vec>& mutable_biases() { return b_; }

  std::size_t num_params() const;
  std::size_t nonzero_params() const;

  double forward(const Vec& x) const;
  Vec input_grad(const Vec& x) const;
  // Batched value + input gradient, rows are points.
  void value_and_input_grad(const Mat& X, Vec& val, Mat& grad) const;
  void value_batch(const Mat& X, Vec& val) const;

  struct ParamGrad {
    Mat theta;
    std::vector<Mat> W;
    std::vector<Vec> b;
  };
  // Gradient of sum_r c_r * forward(X.row(r)) with respect to all parameters.
  ParamGrad param_grad(const Mat& X, const Vec& c) const;
  void apply_update(const ParamGrad& g, double step);  // params -= step * g, then clamp
  void clamp_params();

 private:
  Mat embed(const Mat& X) const;

  int input_dim_ = 0;
  int embed_dim_ = 0;  // 0 disables the embedding
  double bound_B_ = 0;
  Mat theta_;               // input_dim x embed_dim
  std::vector<Mat> W_;      // W_[0]: h0 x in_eff ... W_[L-1]: 1 x h_{L-2}
  std::vector<Vec> b_;
};

// Brenier potential ||x||^2/2 - (phi_nn(x) - mean_offset).
class MlpBrenier : public BrenierPotential {
 public:
  MlpBrenier(const MlpPotential& net, double mean_offset)
      : net_(net), mean_offset_(mean_offset) {}
  int dim() const override { return net_.input_dim(); }
  void value_and_grad(const Mat& X, Vec& values, Mat& grads) const override;

 private:
  const MlpPotential& net_;
  double mean_offset_;
};

// cl(iota(x) - grad phi_nn(iota(x))) zero-padded back; coordinates beyond the
// net's input dimension pass through unchanged.
Vec transport_nn(const MlpPotential& net, const Vec& x_full);

struct NnConfig {
  int J = 0;                // 0: select_J(map, n)
  int d_max = 0;            // 0: derive from (map, J), capped at the data dimension
  std::vector<int> hidden;  // dense widths; empty: derived from the theorem shapes
  int embed_dim = 0;        // d' (0 disables)
  double bound_B = 64.0;
  double sparsity_R = 0;    // reported budget only, never enforced
  int iterations = 175;
  int batch = 100;
  double lr = 1e-2;
  std::uint64_t seed = 0;
  double conj_tol = 1e-6;
  int conj_max_iter = 150;
  int threads = 1;
};

// Theorem-shaped defaults: W ~ J^{1/q} 2^{alpha J/(1+2alpha)}, L ~ J^{2+2/q},
// B ~ 2^{J^{1/q}/2}, clamped to desk scale (W <= 512, hidden layers <= 7 at
// n <= 1e4). preset "sim7" switches the embedding on with d' = 20.
NnConfig nn_default_config(const SmoothnessMap& map, std::size_t n,
                           const std::string& preset = "theory");

struct NnFit {
  MlpPotential net;
  std::vector<double> objective_trace;  // per-step batch semi-dual values
  NnConfig config;                      // resolved configuration
  int d_max = 0;
};

// Empirical semi-dual minimization over the network class by SGD with a
// cosine-decay schedule. Q-side conjugates come from the row-ascent solver
// with per-sample warm starts; parameter gradients treat the argmaxes as
// fixed.
NnFit train_nn(const Mat& X, const Mat& Y, const SmoothnessMap& map, NnConfig cfg);

}  // namespace otmap
