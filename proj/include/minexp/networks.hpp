// The two multilayer perceptrons: a state network (x0, tau) -> (x1, x2, psi,
// tf) with per-layer adaptive sine activations, and a co-state network
// (x0, tau) -> (p1, p2) with SiLU activations.
//
// The batched forward pass carries a forward-mode tangent seeded in tau, so
// d(outputs)/dtau come out of the same pass; backward() propagates adjoints
// of both the value and tangent channels down to the flat parameter vector
// (the R-operator rules, needed because the losses contain dtau-derivatives).

#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace minexp {

enum class Activation { kAdaptiveSine, kSilu, kIdentity };

struct LayerSpec {
  int width = 128;
  Activation act = Activation::kAdaptiveSine;
};

class Mlp {
 public:
  Mlp() = default;
  Mlp(int in_dim, std::vector<LayerSpec> hidden, int out_dim);

  void init_xavier(std::uint64_t seed);

  struct Cache {
    std::vector<Eigen::MatrixXd> a, adot;  // a[0] is the input batch
    std::vector<Eigen::MatrixXd> z, zdot;
  };

  // X: in_dim x B, Xdot: tangent of the input. Outputs land in
  // cache.a.back() / cache.adot.back() (out_dim x B).
  void forward(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Xdot,
               Cache& cache) const;

  // Accumulates d(loss)/d(params) into `grad` (same layout as params()) given
  // adjoints of the outputs and of their tangents. Optionally returns the
  // input adjoints.
  void backward(const Cache& cache, const Eigen::MatrixXd& ybar,
                const Eigen::MatrixXd& ydotbar, std::span<double> grad,
                Eigen::MatrixXd* xbar = nullptr,
                Eigen::MatrixXd* xdotbar = nullptr) const;

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  std::size_t param_count() const { return params_.size(); }

  // Sum of squared linear-layer weights (biases and activation parameters
  // excluded).
  double weight_sq_sum() const;
  // Adds scale * 2 * w to the gradient entry of every linear-layer weight.
  void add_weight_grad(double scale, std::span<double> grad) const;

  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }
  const std::vector<LayerSpec>& hidden() const { return hidden_; }

  void describe(std::ostream& os) const;

 private:
  friend class PinnModel;
  struct LayerMeta {
    int in = 0, out = 0;
    int w_off = 0, b_off = 0;
    int act_off = -1;  // alpha at act_off, beta at act_off + 1
    Activation act = Activation::kIdentity;
  };

  int in_dim_ = 0, out_dim_ = 0;
  std::vector<LayerSpec> hidden_;
  std::vector<LayerMeta> layers_;
  std::vector<double> params_;
};

class PinnModel {
 public:
  PinnModel() = default;

  static PinnModel init(std::uint64_t seed,
                        const std::vector<LayerSpec>& state_hidden,
                        const std::vector<LayerSpec>& costate_hidden,
                        double pos_scale = 15.0);

  // Per-collocation-point outputs and their dtau tangents, one column each.
  struct BatchEval {
    Eigen::VectorXd x1, x2, psi, tf, p1, p2;
    Eigen::VectorXd dx1, dx2, dpsi, dtf, dp1, dp2;
    int size() const { return static_cast<int>(x1.size()); }
  };

  struct BatchCache {
    Mlp::Cache state, costate;
    Eigen::VectorXd tf_raw, dtf_raw;  // pre-softplus final-time head
  };

  // x0: 2 x B initial positions, tau: B normalized times in [0, 1].
  BatchEval forward_batch(const Eigen::Matrix2Xd& x0,
                          const Eigen::VectorXd& tau,
                          BatchCache* cache = nullptr) const;

  // Adjoints use the same field names as BatchEval.
  void backward_batch(const BatchCache& cache, const BatchEval& bar,
                      std::span<double> state_grad,
                      std::span<double> costate_grad) const;

  struct StateOut {
    std::array<double, 2> x{0, 0};
    double psi = 0.0;
    double tf = 0.0;
  };
  StateOut forward_state(const std::array<double, 2>& x0, double tau) const;
  std::array<double, 2> forward_costate(const std::array<double, 2>& x0,
                                        double tau) const;

  // 1e-6 * sum of squared co-state-network weights.
  double l2_penalty() const;
  void add_l2_penalty_grad(std::span<double> costate_grad) const;

  Mlp& state_net() { return state_net_; }
  Mlp& costate_net() { return costate_net_; }
  const Mlp& state_net() const { return state_net_; }
  const Mlp& costate_net() const { return costate_net_; }
  double pos_scale() const { return pos_scale_; }
  std::uint64_t seed() const { return seed_; }

  // Bit-exact text checkpoint (hexfloat parameters, version header).
  void save(const std::string& path) const;
  static PinnModel load(const std::string& path);

 private:
  Mlp state_net_, costate_net_;
  double pos_scale_ = 15.0;
  std::uint64_t seed_ = 0;
};

constexpr double kL2Lambda = 1e-6;

}  // namespace minexp
