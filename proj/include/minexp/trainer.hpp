// The residual-loss trainer: ten losses evaluated on collocation batches,
// hand-tuned per-loss weights, gradient-statistics annealing, and Adam.
//
// Per epoch the networks run once in batched form (values plus dtau
// tangents); the losses are then assembled on an autodiff tape whose leaves
// are the per-point network outputs and tangents, so every loss is an exact
// differentiable function of them. The tape's leaf adjoints are pushed
// through the networks' backward pass to obtain parameter gradients.

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "minexp/autodiff.hpp"
#include "minexp/networks.hpp"
#include "minexp/pmp.hpp"

namespace minexp {

struct LossWeights {
  // w[k-1] is the weight of loss k; w10 applies to the path-cost term.
  std::array<double, 10> w{100, 1, 1, 1, 50, 50, 1, 50, 50, 1};

  static LossWeights static_defaults() {
    return LossWeights{{100, 1, 1, 1, 50, 50, 1, 50, 50, 1}};
  }
  static LossWeights time_varying_defaults() {
    return LossWeights{{100, 0, 2, 2, 200, 200, 75, 50, 50, 1}};
  }
  static LossWeights defaults_for(TemporalMode mode) {
    return mode == TemporalMode::kStatic ? static_defaults()
                                         : time_varying_defaults();
  }
};

struct TrainConfig {
  int collocation = 512;  // N, tau samples per initial state
  int max_epochs = 10000;
  double learning_rate = 1e-3;
  double lr_decay_factor = 2.0;  // 10 for time-varying fields
  int lr_decay_epoch = 7500;
  double anneal_alpha = 0.9;
  int anneal_every = 50;
  // First epoch at which the balancing updates run. A warm-up under the
  // fixed weights lets structurally hard terms (the initial-state boundary
  // in conditioned mode) establish themselves before the balancer starts
  // equalizing gradient magnitudes.
  int anneal_start = 0;
  bool use_stop_criteria = true;
  std::array<double, 9> stop_thresholds{1e-3, 1e-3, 1e-3, 1e-3, 1e-3,
                                        1e-3, 1e-3, 1e-3, 1e-3};
  double divergence_threshold = 1e6;
  std::uint64_t seed = 1;
  std::vector<LayerSpec> state_hidden;
  std::vector<LayerSpec> costate_hidden;
  int conditioned_initial_states = 24;  // M, conditioned mode only
  int log_every = 50;

  // Full profile: the reference setup (128-neuron nets, N = 512).
  static TrainConfig full_profile(TemporalMode mode);
  // Desk profile: reduced configuration for CPU-bound CI runs.
  static TrainConfig desk_profile(TemporalMode mode);

  void validate() const;
};

struct LossReport {
  std::array<double, 10> losses{};  // unweighted L1..L10
  double reg = 0.0;
  int epochs = 0;
  double wall_seconds = 0.0;
  bool converged = false;
  bool diverged = false;
  std::string divergence_reason;
};

struct TrajectoryPoint {
  double tau, t, x1, x2, psi, p1, p2, H, c;
};
using Trajectory = std::vector<TrajectoryPoint>;

// A collocation batch: n_groups initial states, each with the same uniform
// n_tau-point tau grid over [0, 1] (endpoints included).
struct Batch {
  Eigen::Matrix2Xd x0;   // 2 x (n_groups * n_tau), constant within a group
  Eigen::VectorXd tau;   // matching tau values
  int n_tau = 0;
  int n_groups = 1;
};

Batch collocate_single(const std::array<double, 2>& x0, int n_tau);
Batch collocate_conditioned(double workspace_half_width, int n_groups,
                            int n_tau, std::uint64_t sampler_seed);

// The recorded loss computation. Leaves are the 12 per-point quantities of
// PinnModel::BatchEval; bind() + replay() re-evaluates for new outputs.
class LossGraph {
 public:
  LossGraph(const Scenario& scenario, const Batch& batch);

  void bind(const PinnModel::BatchEval& eval);
  void replay();
  std::array<double, 10> loss_values() const;

  // Leaf adjoints of sum_k coeff[k] * L_{k+1}, shaped like BatchEval.
  PinnModel::BatchEval leaf_gradient(const std::array<double, 10>& coeff);

 private:
  ad::Tape tape_;
  const Batch* batch_;
  std::vector<ad::Var> leaves_;  // 12 per point: see layout in .cpp
  std::array<ad::Var, 10> loss_;
};

// Unweighted losses L1..L10 of `model` on `batch`, plus the L2 penalty.
std::array<double, 11> compute_losses(const PinnModel& model,
                                      const Scenario& scenario,
                                      const Batch& batch);

struct AnnealingState {
  std::array<double, 10> lambda{1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
  double alpha = 0.9;
  // Ceiling on the raw ratio: once a residual is essentially solved its mean
  // gradient vanishes and the ratio diverges, destabilizing the remaining
  // terms. Capping it keeps the boost bounded without affecting the useful
  // regime (weights and healthy ratios are orders of magnitude smaller).
  double lambda_cap = 1e4;
};

// lambda_k <- alpha lambda_k + (1-alpha) * min(ref_grad_max /
// mean_abs_grad[k], lambda_cap); entries with mean_abs_grad[k] == 0 are
// carried over unchanged.
void anneal(AnnealingState& state, const std::array<double, 10>& mean_abs_grad,
            double ref_grad_max);

struct AdamState {
  std::vector<double> m, v;
  long step = 0;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
};

void adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, double lr);

struct TrainResult {
  PinnModel model;
  LossReport report;
  Trajectory trajectory;
};

TrainResult train_single(const Scenario& scenario, const TrainConfig& config,
                         const LossWeights& weights,
                         std::ostream* log_csv = nullptr);

// Conditioned mode: x0 sampled over the workspace, fixed goal; the returned
// model solves for any x0 without retraining.
TrainResult train_conditioned(const Scenario& scenario,
                              const TrainConfig& config,
                              const LossWeights& weights,
                              std::ostream* log_csv = nullptr);

// Post-training evaluation at a specific x0 (no retraining).
LossReport evaluate_losses(const PinnModel& model, const Scenario& scenario,
                           int n_tau);
Trajectory sample_trajectory(const PinnModel& model, const Scenario& scenario,
                             int n_tau);

void write_trajectory_csv(std::ostream& os, const Trajectory& t);
Trajectory read_trajectory_csv(std::istream& is);

}  // namespace minexp
