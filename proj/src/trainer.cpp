#include "minexp/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace minexp {

TrainConfig TrainConfig::full_profile(TemporalMode mode) {
  TrainConfig c;
  c.collocation = 512;
  c.max_epochs = 10000;
  c.learning_rate = 1e-3;
  c.lr_decay_factor = mode == TemporalMode::kStatic ? 2.0 : 10.0;
  c.lr_decay_epoch = 7500;
  c.state_hidden = {{128, Activation::kAdaptiveSine},
                    {128, Activation::kAdaptiveSine},
                    {128, Activation::kAdaptiveSine}};
  c.costate_hidden = {{128, Activation::kSilu},
                      {128, Activation::kSilu},
                      {128, Activation::kSilu},
                      {128, Activation::kSilu},
                      {128, Activation::kSilu}};
  return c;
}

TrainConfig TrainConfig::desk_profile(TemporalMode mode) {
  TrainConfig c = full_profile(mode);
  c.collocation = 128;
  c.max_epochs = 3000;
  c.lr_decay_epoch = 2250;
  for (LayerSpec& l : c.state_hidden) l.width = 64;
  for (LayerSpec& l : c.costate_hidden) l.width = 64;
  return c;
}

void TrainConfig::validate() const {
  if (collocation < 2) {
    throw std::invalid_argument("train config: collocation count must be >= 2");
  }
  if (!(learning_rate > 0.0)) {
    throw std::invalid_argument("train config: learning rate must be positive");
  }
  if (max_epochs < 1 || conditioned_initial_states < 1) {
    throw std::invalid_argument("train config: counts must be positive");
  }
  if (state_hidden.empty() || costate_hidden.empty()) {
    throw std::invalid_argument("train config: missing network architecture");
  }
}

Batch collocate_single(const std::array<double, 2>& x0, int n_tau) {
  Batch b;
  b.n_tau = n_tau;
  b.n_groups = 1;
  b.x0.resize(2, n_tau);
  b.tau.resize(n_tau);
  for (int i = 0; i < n_tau; ++i) {
    b.x0(0, i) = x0[0];
    b.x0(1, i) = x0[1];
    b.tau[i] = static_cast<double>(i) / (n_tau - 1);
  }
  return b;
}

Batch collocate_conditioned(double workspace_half_width, int n_groups,
                            int n_tau, std::uint64_t sampler_seed) {
  Batch b;
  b.n_tau = n_tau;
  b.n_groups = n_groups;
  b.x0.resize(2, static_cast<Eigen::Index>(n_groups) * n_tau);
  b.tau.resize(static_cast<Eigen::Index>(n_groups) * n_tau);
  std::mt19937_64 rng(sampler_seed);
  std::uniform_real_distribution<double> u(-workspace_half_width,
                                           workspace_half_width);
  for (int g = 0; g < n_groups; ++g) {
    const double x1 = u(rng);
    const double x2 = u(rng);
    for (int i = 0; i < n_tau; ++i) {
      const Eigen::Index col = static_cast<Eigen::Index>(g) * n_tau + i;
      b.x0(0, col) = x1;
      b.x0(1, col) = x2;
      b.tau[col] = static_cast<double>(i) / (n_tau - 1);
    }
  }
  return b;
}

namespace {
constexpr int kLeavesPerPoint = 12;
}

LossGraph::LossGraph(const Scenario& s, const Batch& batch) : batch_(&batch) {
  using ad::Var;
  const int N = batch.n_tau;
  const int M = batch.n_groups;
  if (N < 2) {
    throw std::invalid_argument("loss graph: need at least two tau samples");
  }
  const double dtau = 1.0 / (N - 1);
  const double v = s.speed;
  const ThreatField& field = s.field;

  leaves_.reserve(static_cast<std::size_t>(kLeavesPerPoint) * N * M);
  for (Eigen::Index i = 0; i < batch.tau.size(); ++i) {
    for (int k = 0; k < kLeavesPerPoint; ++k) leaves_.push_back(tape_.leaf(0.0));
  }
  // Leaves start at 0 (= log of nothing problematic), but tf is divided by;
  // bind a safe placeholder before the expressions are recorded.
  for (Eigen::Index i = 0; i < batch.tau.size(); ++i) {
    tape_.set_value(leaves_[i * kLeavesPerPoint + 3], 1.0);
  }

  std::array<Var, 10> total;
  for (int g = 0; g < M; ++g) {
    auto leaf = [&](int i, int k) -> Var {
      return leaves_[static_cast<std::size_t>(g * N + i) * kLeavesPerPoint + k];
    };
    std::vector<Var> x1(N), x2(N), psi(N), tf(N), p1(N), p2(N);
    std::vector<Var> dx1(N), dx2(N), dpsi(N), dtf(N), dp1(N), dp2(N);
    for (int i = 0; i < N; ++i) {
      x1[i] = leaf(i, 0);
      x2[i] = leaf(i, 1);
      psi[i] = leaf(i, 2);
      tf[i] = leaf(i, 3);
      p1[i] = leaf(i, 4);
      p2[i] = leaf(i, 5);
      dx1[i] = leaf(i, 6);
      dx2[i] = leaf(i, 7);
      dpsi[i] = leaf(i, 8);
      dtf[i] = leaf(i, 9);
      dp1[i] = leaf(i, 10);
      dp2[i] = leaf(i, 11);
    }
    const double x01 = batch.x0(0, static_cast<Eigen::Index>(g) * N);
    const double x02 = batch.x0(1, static_cast<Eigen::Index>(g) * N);

    // Batch-mean final time: the single scalar used by H_d and the path cost.
    Var tf_mean = tf[0];
    for (int i = 1; i < N; ++i) tf_mean = tf_mean + tf[i];
    tf_mean = tf_mean / static_cast<double>(N);

    std::vector<Var> c(N), gc1(N), gc2(N), ct(N), H(N), cpsi(N), spsi(N);
    for (int i = 0; i < N; ++i) {
      const double taui = batch.tau[static_cast<Eigen::Index>(g) * N + i];
      Var t = tf[i] * taui;
      c[i] = field.value_of<Var>(x1[i], x2[i], t);
      auto gc = field.grad_x_of<Var>(x1[i], x2[i], t);
      gc1[i] = gc[0];
      gc2[i] = gc[1];
      ct[i] = field.dc_dt_of<Var>(x1[i], x2[i], t);
      cpsi[i] = ad::cos(psi[i]);
      spsi[i] = ad::sin(psi[i]);
      H[i] = s.lambda_bolza + c[i] + p1[i] * v * cpsi[i] + p2[i] * v * spsi[i];
    }

    // Desired Hamiltonian by backward trapezoid accumulation of dc/dt at the
    // batch-mean final time; identically zero for static fields.
    std::vector<Var> hd(N);
    if (field.is_static()) {
      Var zero = tape_.constant(0.0);
      for (int i = 0; i < N; ++i) hd[i] = zero;
    } else {
      std::vector<Var> d(N);
      for (int i = 0; i < N; ++i) {
        const double taui = batch.tau[static_cast<Eigen::Index>(g) * N + i];
        d[i] = field.dc_dt_of<Var>(x1[i], x2[i], tf_mean * taui);
      }
      hd[N - 1] = tape_.constant(0.0);
      for (int i = N - 2; i >= 0; --i) {
        hd[i] = hd[i + 1] - tf_mean * (0.5 * dtau) * (d[i] + d[i + 1]);
      }
    }

    auto sq = [](Var x) { return x * x; };
    Var l1, l2, l3, l4, l5, l6, l7;
    for (int i = 0; i < N; ++i) {
      const double taui = batch.tau[static_cast<Eigen::Index>(g) * N + i];
      Var e1 = sq(hd[i] - H[i]);
      // dH/dt along the prediction, via the chain rule in tau.
      Var dH_dtau = v * (dp1[i] * cpsi[i] - p1[i] * spsi[i] * dpsi[i] +
                         dp2[i] * spsi[i] + p2[i] * cpsi[i] * dpsi[i]) +
                    gc1[i] * dx1[i] + gc2[i] * dx2[i] +
                    ct[i] * (tf[i] + dtf[i] * taui);
      Var e2 = sq(ct[i] - dH_dtau / tf[i]);
      Var e3 = sq(dx1[i] / tf[i] - v * cpsi[i]);
      Var e4 = sq(dx2[i] / tf[i] - v * spsi[i]);
      Var e5 = sq(dp1[i] / tf[i] + gc1[i]);
      Var e6 = sq(dp2[i] / tf[i] + gc2[i]);
      Var e7 = sq(p2[i] * v * cpsi[i] - p1[i] * v * spsi[i]);
      if (i == 0) {
        l1 = e1; l2 = e2; l3 = e3; l4 = e4; l5 = e5; l6 = e6; l7 = e7;
      } else {
        l1 = l1 + e1; l2 = l2 + e2; l3 = l3 + e3; l4 = l4 + e4;
        l5 = l5 + e5; l6 = l6 + e6; l7 = l7 + e7;
      }
    }
    const double inv_n = 1.0 / N;
    l1 = l1 * inv_n; l2 = l2 * inv_n; l3 = l3 * inv_n; l4 = l4 * inv_n;
    l5 = l5 * inv_n; l6 = l6 * inv_n; l7 = l7 * inv_n;

    Var l8 = sq(x1[0] - x01) + sq(x2[0] - x02);
    Var l9 = sq(x1[N - 1] - s.goal[0]) + sq(x2[N - 1] - s.goal[1]);

    Var cost_sum = c[1];
    for (int i = 2; i < N; ++i) cost_sum = cost_sum + c[i];
    Var l10 = tf_mean * cost_sum * dtau;
    if (s.lambda_bolza > 0.0) l10 = l10 + s.lambda_bolza * tf_mean;

    const std::array<Var, 10> group{l1, l2, l3, l4, l5, l6, l7, l8, l9, l10};
    for (int k = 0; k < 10; ++k) {
      total[k] = g == 0 ? group[k] : total[k] + group[k];
    }
  }
  for (int k = 0; k < 10; ++k) {
    loss_[k] = M == 1 ? total[k] : total[k] * (1.0 / M);
  }
}

void LossGraph::bind(const PinnModel::BatchEval& e) {
  const Eigen::Index n = batch_->tau.size();
  if (e.size() != n) {
    throw std::invalid_argument("loss graph: batch size mismatch");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t base = static_cast<std::size_t>(i) * kLeavesPerPoint;
    tape_.set_value(leaves_[base + 0], e.x1[i]);
    tape_.set_value(leaves_[base + 1], e.x2[i]);
    tape_.set_value(leaves_[base + 2], e.psi[i]);
    tape_.set_value(leaves_[base + 3], e.tf[i]);
    tape_.set_value(leaves_[base + 4], e.p1[i]);
    tape_.set_value(leaves_[base + 5], e.p2[i]);
    tape_.set_value(leaves_[base + 6], e.dx1[i]);
    tape_.set_value(leaves_[base + 7], e.dx2[i]);
    tape_.set_value(leaves_[base + 8], e.dpsi[i]);
    tape_.set_value(leaves_[base + 9], e.dtf[i]);
    tape_.set_value(leaves_[base + 10], e.dp1[i]);
    tape_.set_value(leaves_[base + 11], e.dp2[i]);
  }
}

void LossGraph::replay() { tape_.replay(); }

std::array<double, 10> LossGraph::loss_values() const {
  std::array<double, 10> out;
  for (int k = 0; k < 10; ++k) out[k] = loss_[k].value();
  return out;
}

PinnModel::BatchEval LossGraph::leaf_gradient(
    const std::array<double, 10>& coeff) {
  using ad::Var;
  const std::size_t mark = tape_.checkpoint();
  Var total = tape_.constant(0.0);
  for (int k = 0; k < 10; ++k) {
    if (coeff[k] != 0.0) total = total + coeff[k] * loss_[k];
  }
  const std::vector<double> g = tape_.gradient(total, leaves_);
  tape_.rewind(mark);

  const Eigen::Index n = batch_->tau.size();
  PinnModel::BatchEval bar;
  for (Eigen::VectorXd* v : {&bar.x1, &bar.x2, &bar.psi, &bar.tf, &bar.p1,
                             &bar.p2, &bar.dx1, &bar.dx2, &bar.dpsi, &bar.dtf,
                             &bar.dp1, &bar.dp2}) {
    v->resize(n);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t base = static_cast<std::size_t>(i) * kLeavesPerPoint;
    bar.x1[i] = g[base + 0];
    bar.x2[i] = g[base + 1];
    bar.psi[i] = g[base + 2];
    bar.tf[i] = g[base + 3];
    bar.p1[i] = g[base + 4];
    bar.p2[i] = g[base + 5];
    bar.dx1[i] = g[base + 6];
    bar.dx2[i] = g[base + 7];
    bar.dpsi[i] = g[base + 8];
    bar.dtf[i] = g[base + 9];
    bar.dp1[i] = g[base + 10];
    bar.dp2[i] = g[base + 11];
  }
  return bar;
}

std::array<double, 11> compute_losses(const PinnModel& model,
                                      const Scenario& scenario,
                                      const Batch& batch) {
  LossGraph graph(scenario, batch);
  const PinnModel::BatchEval eval = model.forward_batch(batch.x0, batch.tau);
  graph.bind(eval);
  graph.replay();
  const std::array<double, 10> l = graph.loss_values();
  std::array<double, 11> out;
  for (int k = 0; k < 10; ++k) out[k] = l[k];
  out[10] = model.l2_penalty();
  return out;
}

void anneal(AnnealingState& state, const std::array<double, 10>& mean_abs_grad,
            double ref_grad_max) {
  for (int k = 0; k < 10; ++k) {
    if (!(mean_abs_grad[k] > 0.0)) continue;  // carried over unchanged
    const double hat =
        std::min(ref_grad_max / mean_abs_grad[k], state.lambda_cap);
    state.lambda[k] = state.alpha * state.lambda[k] + (1.0 - state.alpha) * hat;
  }
}

void adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, double lr) {
  if (params.size() != grads.size()) {
    throw std::invalid_argument("adam: shape mismatch");
  }
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
    state.step = 0;
  }
  ++state.step;
  const double b1 = state.beta1, b2 = state.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
    state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
  }
}

namespace {

struct EpochContext {
  LossGraph* graph;
  PinnModel* model;
  const LossWeights* weights;
};

double mean_abs(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (double x : a) acc += std::abs(x);
  for (double x : b) acc += std::abs(x);
  return acc / static_cast<double>(a.size() + b.size());
}

double max_abs(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  for (double x : b) m = std::max(m, std::abs(x));
  return m;
}

void log_header(std::ostream* os) {
  if (os == nullptr) return;
  *os << "epoch,lr,L1,L2,L3,L4,L5,L6,L7,L8,L9,L10,reg\n";
}

void log_row(std::ostream* os, int epoch, double lr,
             const std::array<double, 10>& l, double reg) {
  if (os == nullptr) return;
  char buf[512];
  int n = std::snprintf(buf, sizeof buf, "%d,%.17g", epoch, lr);
  for (double v : l) {
    n += std::snprintf(buf + n, sizeof buf - n, ",%.17g", v);
  }
  n += std::snprintf(buf + n, sizeof buf - n, ",%.17g\n", reg);
  os->write(buf, n);
}

TrainResult train_on_batch(const Scenario& scenario, const Batch& batch,
                           const TrainConfig& config,
                           const LossWeights& weights, std::ostream* log_csv) {
  scenario.validate();
  config.validate();
  const auto t_start = std::chrono::steady_clock::now();

  PinnModel model = PinnModel::init(config.seed, config.state_hidden,
                                    config.costate_hidden,
                                    scenario.workspace_half_width);
  LossGraph graph(scenario, batch);

  std::vector<double> sgrad(model.state_net().param_count());
  std::vector<double> cgrad(model.costate_net().param_count());
  AdamState adam_s, adam_c;
  AnnealingState ann;
  ann.alpha = config.anneal_alpha;

  LossReport report;
  Trajectory best_unused;
  double lr = config.learning_rate;
  log_header(log_csv);

  std::array<double, 10> losses{};
  const bool time_varying = !scenario.field.is_static();
  (void)time_varying;

  auto param_grads_for = [&](const std::array<double, 10>& coeff,
                             const PinnModel::BatchCache& cache) {
    std::fill(sgrad.begin(), sgrad.end(), 0.0);
    std::fill(cgrad.begin(), cgrad.end(), 0.0);
    const PinnModel::BatchEval bar = graph.leaf_gradient(coeff);
    model.backward_batch(cache, bar, sgrad, cgrad);
  };

  // Track the best parameters seen so far, judged by the worst included
  // residual (L1..L9 with nonzero weight). Training with adaptive loss
  // balancing is not monotone -- occasional instability spikes can land on
  // the final epoch -- so the returned model is the best visited, not the
  // last.
  auto worst_residual = [&](const std::array<double, 10>& l) {
    double w = 0.0;
    for (int k = 0; k < 9; ++k) {
      if (weights.w[k] == 0.0) continue;
      w = std::max(w, l[k]);
    }
    return w;
  };
  double best_worst = std::numeric_limits<double>::infinity();
  std::vector<double> best_sparams, best_cparams;
  std::array<double, 10> best_losses{};
  bool have_best = false;

  int epoch = 0;
  for (; epoch < config.max_epochs; ++epoch) {
    if (epoch == config.lr_decay_epoch) lr /= config.lr_decay_factor;

    PinnModel::BatchCache cache;
    PinnModel::BatchEval eval;
    try {
      eval = model.forward_batch(batch.x0, batch.tau, &cache);
      graph.bind(eval);
      graph.replay();
    } catch (const std::exception& e) {
      report.diverged = true;
      report.divergence_reason = e.what();
      break;
    }
    losses = graph.loss_values();
    const double reg = model.l2_penalty();

    bool bad = false;
    for (int k = 0; k < 10; ++k) {
      if (!std::isfinite(losses[k]) || losses[k] > config.divergence_threshold) {
        report.diverged = true;
        report.divergence_reason =
            "loss L" + std::to_string(k + 1) + " = " +
            std::to_string(losses[k]) + " at epoch " + std::to_string(epoch);
        bad = true;
        break;
      }
    }
    if (bad) break;

    if (const double w = worst_residual(losses); w < best_worst) {
      best_worst = w;
      best_sparams = model.state_net().params();
      best_cparams = model.costate_net().params();
      best_losses = losses;
      have_best = true;
    }

    if (epoch % config.log_every == 0) log_row(log_csv, epoch, lr, losses, reg);

    if (config.use_stop_criteria) {
      bool all_ok = true;
      for (int k = 0; k < 9; ++k) {
        if (weights.w[k] == 0.0) continue;  // excluded losses don't gate
        if (!(losses[k] < config.stop_thresholds[k])) {
          all_ok = false;
          break;
        }
      }
      if (all_ok) {
        report.converged = true;
        break;
      }
    }

    // Gradient-statistics annealing: the reference is the fixed-weight total,
    // and each term k gets a boost lambda_k smoothed toward
    // max|grad L_ref| / mean|grad L_k|. Terms with zero weight stay excluded.
    if (config.anneal_every > 0 && epoch >= config.anneal_start &&
        epoch % config.anneal_every == 0) {
      param_grads_for(weights.w, cache);
      const double ref_max = max_abs(sgrad, cgrad);
      // The path-cost term (k = 9) is the optimization objective, not a
      // residual that can vanish; boosting it by its (small) mean gradient
      // lets it overpower the physics, so it keeps its fixed weight.
      std::array<double, 10> means{};
      for (int k = 0; k < 9; ++k) {
        if (weights.w[k] == 0.0) continue;
        std::array<double, 10> ck{};
        ck[k] = 1.0;
        param_grads_for(ck, cache);
        means[k] = mean_abs(sgrad, cgrad);
      }
      anneal(ann, means, ref_max);
    }

    // Total loss: L_ref + sum_k lambda_k L_k (k < 10).
    std::array<double, 10> coeff{};
    for (int k = 0; k < 9; ++k) {
      coeff[k] = weights.w[k] == 0.0 ? 0.0 : weights.w[k] + ann.lambda[k];
    }
    coeff[9] = weights.w[9];
    param_grads_for(coeff, cache);
    model.add_l2_penalty_grad(cgrad);

    bool grad_ok = true;
    for (double g : sgrad) {
      if (!std::isfinite(g)) { grad_ok = false; break; }
    }
    if (grad_ok) {
      for (double g : cgrad) {
        if (!std::isfinite(g)) { grad_ok = false; break; }
      }
    }
    if (!grad_ok) {
      report.diverged = true;
      report.divergence_reason = "non-finite gradient at epoch " +
                                 std::to_string(epoch);
      break;
    }

    adam_step(model.state_net().params(), sgrad, adam_s, lr);
    adam_step(model.costate_net().params(), cgrad, adam_c, lr);
  }

  if (have_best && best_worst < worst_residual(losses)) {
    model.state_net().params() = best_sparams;
    model.costate_net().params() = best_cparams;
    losses = best_losses;
  }
  report.losses = losses;
  report.reg = model.l2_penalty();
  report.epochs = epoch;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  log_row(log_csv, epoch, lr, losses, report.reg);

  TrainResult result;
  result.model = std::move(model);
  result.report = report;
  result.trajectory =
      sample_trajectory(result.model, scenario, batch.n_tau);
  return result;
}

}  // namespace

TrainResult train_single(const Scenario& scenario, const TrainConfig& config,
                         const LossWeights& weights, std::ostream* log_csv) {
  const Batch batch = collocate_single(scenario.start, config.collocation);
  return train_on_batch(scenario, batch, config, weights, log_csv);
}

TrainResult train_conditioned(const Scenario& scenario,
                              const TrainConfig& config,
                              const LossWeights& weights,
                              std::ostream* log_csv) {
  const Batch batch = collocate_conditioned(
      scenario.workspace_half_width, config.conditioned_initial_states,
      config.collocation, config.seed);
  return train_on_batch(scenario, batch, config, weights, log_csv);
}

LossReport evaluate_losses(const PinnModel& model, const Scenario& scenario,
                           int n_tau) {
  const Batch batch = collocate_single(scenario.start, n_tau);
  const std::array<double, 11> l = compute_losses(model, scenario, batch);
  LossReport r;
  for (int k = 0; k < 10; ++k) r.losses[k] = l[k];
  r.reg = l[10];
  return r;
}

Trajectory sample_trajectory(const PinnModel& model, const Scenario& scenario,
                             int n_tau) {
  const Batch batch = collocate_single(scenario.start, n_tau);
  const PinnModel::BatchEval e = model.forward_batch(batch.x0, batch.tau);
  const double tf_mean = e.tf.mean();
  Trajectory traj(n_tau);
  for (int i = 0; i < n_tau; ++i) {
    TrajectoryPoint& pt = traj[i];
    pt.tau = batch.tau[i];
    pt.t = pt.tau * tf_mean;
    pt.x1 = e.x1[i];
    pt.x2 = e.x2[i];
    pt.psi = e.psi[i];
    pt.p1 = e.p1[i];
    pt.p2 = e.p2[i];
    pt.c = scenario.field.value({pt.x1, pt.x2}, pt.t);
    pt.H = scenario.lambda_bolza + pt.c +
           pt.p1 * scenario.speed * std::cos(pt.psi) +
           pt.p2 * scenario.speed * std::sin(pt.psi);
  }
  return traj;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& t) {
  os << "tau,t,x1,x2,psi,p1,p2,H,c\n";
  char buf[512];
  for (const TrajectoryPoint& p : t) {
    const int n = std::snprintf(
        buf, sizeof buf,
        "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", p.tau, p.t,
        p.x1, p.x2, p.psi, p.p1, p.p2, p.H, p.c);
    os.write(buf, n);
  }
}

Trajectory read_trajectory_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "tau,t,x1,x2,psi,p1,p2,H,c") {
    throw std::runtime_error("trajectory csv: bad header");
  }
  Trajectory t;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    TrajectoryPoint p;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    if (!(ss >> p.tau >> p.t >> p.x1 >> p.x2 >> p.psi >> p.p1 >> p.p2 >> p.H >>
          p.c)) {
      throw std::runtime_error("trajectory csv: bad row");
    }
    t.push_back(p);
  }
  return t;
}

}  // namespace minexp
