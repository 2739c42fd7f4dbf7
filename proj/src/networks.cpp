#include "minexp/networks.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace minexp {
namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

std::string act_name(Activation a) {
  switch (a) {
    case Activation::kAdaptiveSine: return "adaptive-sine";
    case Activation::kSilu: return "silu";
    case Activation::kIdentity: return "identity";
  }
  return "?";
}

Activation act_from_name(const std::string& s) {
  if (s == "adaptive-sine") return Activation::kAdaptiveSine;
  if (s == "silu") return Activation::kSilu;
  if (s == "identity") return Activation::kIdentity;
  throw std::runtime_error("model file: unknown activation '" + s + "'");
}

}  // namespace

Mlp::Mlp(int in_dim, std::vector<LayerSpec> hidden, int out_dim)
    : in_dim_(in_dim), out_dim_(out_dim), hidden_(std::move(hidden)) {
  if (in_dim <= 0 || out_dim <= 0) {
    throw std::invalid_argument("mlp: dimensions must be positive");
  }
  int prev = in_dim_;
  int off = 0;
  for (const LayerSpec& spec : hidden_) {
    if (spec.width <= 0) {
      throw std::invalid_argument("mlp: layer width must be positive");
    }
    LayerMeta m;
    m.in = prev;
    m.out = spec.width;
    m.act = spec.act;
    m.w_off = off;
    off += m.in * m.out;
    m.b_off = off;
    off += m.out;
    if (spec.act == Activation::kAdaptiveSine) {
      m.act_off = off;
      off += 2;
    }
    layers_.push_back(m);
    prev = spec.width;
  }
  LayerMeta out;
  out.in = prev;
  out.out = out_dim_;
  out.act = Activation::kIdentity;
  out.w_off = off;
  off += out.in * out.out;
  out.b_off = off;
  off += out.out;
  layers_.push_back(out);
  params_.assign(off, 0.0);
}

void Mlp::init_xavier(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (const LayerMeta& m : layers_) {
    const double limit = std::sqrt(6.0 / (m.in + m.out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (int k = 0; k < m.in * m.out; ++k) {
      params_[m.w_off + k] = dist(rng);
    }
    for (int k = 0; k < m.out; ++k) params_[m.b_off + k] = 0.0;
    if (m.act_off >= 0) {
      params_[m.act_off] = 1.0;      // alpha
      params_[m.act_off + 1] = 1.0;  // beta
    }
  }
}

void Mlp::forward(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Xdot,
                  Cache& cache) const {
  const Eigen::Index B = X.cols();
  if (X.rows() != in_dim_) {
    throw std::invalid_argument("mlp: input dimension mismatch");
  }
  const std::size_t L = layers_.size();
  cache.a.assign(L + 1, Eigen::MatrixXd());
  cache.adot.assign(L + 1, Eigen::MatrixXd());
  cache.z.assign(L, Eigen::MatrixXd());
  cache.zdot.assign(L, Eigen::MatrixXd());
  cache.a[0] = X;
  cache.adot[0] = Xdot;
  for (std::size_t l = 0; l < L; ++l) {
    const LayerMeta& m = layers_[l];
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>
        W(params_.data() + m.w_off, m.out, m.in);
    Eigen::Map<const Eigen::VectorXd> b(params_.data() + m.b_off, m.out);
    Eigen::MatrixXd& z = cache.z[l];
    Eigen::MatrixXd& zd = cache.zdot[l];
    z.noalias() = W * cache.a[l];
    z.colwise() += b;
    zd.noalias() = W * cache.adot[l];
    switch (m.act) {
      case Activation::kIdentity:
        cache.a[l + 1] = z;
        cache.adot[l + 1] = zd;
        break;
      case Activation::kAdaptiveSine: {
        const double alpha = params_[m.act_off];
        const double beta = params_[m.act_off + 1];
        cache.a[l + 1] = (alpha * (beta * z.array()).sin()).matrix();
        cache.adot[l + 1] =
            (alpha * beta * (beta * z.array()).cos() * zd.array()).matrix();
        break;
      }
      case Activation::kSilu: {
        Eigen::ArrayXXd s =
            z.array().unaryExpr([](double v) { return sigmoid(v); });
        cache.a[l + 1] = (z.array() * s).matrix();
        // f'(z) = s (1 + z (1 - s))
        cache.adot[l + 1] =
            (s * (1.0 + z.array() * (1.0 - s)) * zd.array()).matrix();
        break;
      }
    }
  }
  (void)B;
}

void Mlp::backward(const Cache& cache, const Eigen::MatrixXd& ybar,
                   const Eigen::MatrixXd& ydotbar, std::span<double> grad,
                   Eigen::MatrixXd* xbar, Eigen::MatrixXd* xdotbar) const {
  if (grad.size() != params_.size()) {
    throw std::invalid_argument("mlp: gradient buffer size mismatch");
  }
  Eigen::MatrixXd abar = ybar;
  Eigen::MatrixXd adotbar = ydotbar;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const LayerMeta& m = layers_[l];
    const Eigen::MatrixXd& z = cache.z[l];
    const Eigen::MatrixXd& zd = cache.zdot[l];
    Eigen::MatrixXd zbar, zdotbar;
    switch (m.act) {
      case Activation::kIdentity:
        zbar = std::move(abar);
        zdotbar = std::move(adotbar);
        break;
      case Activation::kAdaptiveSine: {
        const double alpha = params_[m.act_off];
        const double beta = params_[m.act_off + 1];
        Eigen::ArrayXXd sz = (beta * z.array()).sin();
        Eigen::ArrayXXd cz = (beta * z.array()).cos();
        const double ab = alpha * beta;
        // f' = alpha beta cos(beta z), f'' = -alpha beta^2 sin(beta z)
        zbar = (abar.array() * ab * cz -
                adotbar.array() * ab * beta * sz * zd.array())
                   .matrix();
        zdotbar = (adotbar.array() * ab * cz).matrix();
        grad[m.act_off] +=
            (abar.array() * sz).sum() +
            (adotbar.array() * beta * cz * zd.array()).sum();
        grad[m.act_off + 1] +=
            (abar.array() * alpha * z.array() * cz).sum() +
            (adotbar.array() * alpha *
             (cz - beta * z.array() * sz) * zd.array())
                .sum();
        break;
      }
      case Activation::kSilu: {
        Eigen::ArrayXXd s =
            z.array().unaryExpr([](double v) { return sigmoid(v); });
        Eigen::ArrayXXd sp = s * (1.0 - s);
        Eigen::ArrayXXd fp = s + z.array() * sp;
        // f'' = 2 s' + z s'' with s'' = s'(1 - 2s)
        Eigen::ArrayXXd fpp = 2.0 * sp + z.array() * sp * (1.0 - 2.0 * s);
        zbar = (abar.array() * fp + adotbar.array() * fpp * zd.array()).matrix();
        zdotbar = (adotbar.array() * fp).matrix();
        break;
      }
    }
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                             Eigen::RowMajor>>
        Wbar(grad.data() + m.w_off, m.out, m.in);
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>
        W(params_.data() + m.w_off, m.out, m.in);
    Wbar.noalias() += zbar * cache.a[l].transpose();
    Wbar.noalias() += zdotbar * cache.adot[l].transpose();
    Eigen::Map<Eigen::VectorXd> bbar(grad.data() + m.b_off, m.out);
    bbar += zbar.rowwise().sum();
    if (l > 0 || xbar != nullptr) {
      abar.noalias() = W.transpose() * zbar;
      adotbar.noalias() = W.transpose() * zdotbar;
    }
  }
  if (xbar != nullptr) *xbar = abar;
  if (xdotbar != nullptr) *xdotbar = adotbar;
}

double Mlp::weight_sq_sum() const {
  double acc = 0.0;
  for (const LayerMeta& m : layers_) {
    for (int k = 0; k < m.in * m.out; ++k) {
      const double w = params_[m.w_off + k];
      acc += w * w;
    }
  }
  return acc;
}

void Mlp::add_weight_grad(double scale, std::span<double> grad) const {
  for (const LayerMeta& m : layers_) {
    for (int k = 0; k < m.in * m.out; ++k) {
      grad[m.w_off + k] += scale * 2.0 * params_[m.w_off + k];
    }
  }
}

void Mlp::describe(std::ostream& os) const {
  os << in_dim_ << " ->";
  for (const LayerSpec& h : hidden_) {
    os << " " << h.width << "(" << act_name(h.act) << ")";
  }
  os << " -> " << out_dim_;
}

PinnModel PinnModel::init(std::uint64_t seed,
                          const std::vector<LayerSpec>& state_hidden,
                          const std::vector<LayerSpec>& costate_hidden,
                          double pos_scale) {
  PinnModel m;
  m.seed_ = seed;
  m.pos_scale_ = pos_scale;
  m.state_net_ = Mlp(3, state_hidden, 4);
  m.costate_net_ = Mlp(3, costate_hidden, 2);
  // Distinct streams for the two networks.
  m.state_net_.init_xavier(seed * 2654435761u + 1);
  m.costate_net_.init_xavier(seed * 2654435761u + 2);
  return m;
}

PinnModel::BatchEval PinnModel::forward_batch(const Eigen::Matrix2Xd& x0,
                                              const Eigen::VectorXd& tau,
                                              BatchCache* cache) const {
  const Eigen::Index B = tau.size();
  if (x0.cols() != B) {
    throw std::invalid_argument("forward_batch: x0/tau size mismatch");
  }
  Eigen::MatrixXd X(3, B), Xdot(3, B);
  X.topRows<2>() = x0 / pos_scale_;
  X.row(2) = (2.0 * tau.array() - 1.0).transpose();
  Xdot.setZero();
  Xdot.row(2).setConstant(2.0);  // d(input)/dtau

  BatchCache local;
  BatchCache& c = cache != nullptr ? *cache : local;
  state_net_.forward(X, Xdot, c.state);
  costate_net_.forward(X, Xdot, c.costate);

  const Eigen::MatrixXd& ys = c.state.a.back();
  const Eigen::MatrixXd& yds = c.state.adot.back();
  const Eigen::MatrixXd& yp = c.costate.a.back();
  const Eigen::MatrixXd& ydp = c.costate.adot.back();

  BatchEval out;
  // Positions are produced in normalized units and scaled back to meters so
  // the network works at O(1) amplitudes throughout.
  out.x1 = pos_scale_ * ys.row(0).transpose();
  out.x2 = pos_scale_ * ys.row(1).transpose();
  out.psi = ys.row(2).transpose();
  out.dx1 = pos_scale_ * yds.row(0).transpose();
  out.dx2 = pos_scale_ * yds.row(1).transpose();
  out.dpsi = yds.row(2).transpose();
  c.tf_raw = ys.row(3).transpose();
  c.dtf_raw = yds.row(3).transpose();
  out.tf = c.tf_raw.unaryExpr([](double v) { return softplus(v); });
  out.dtf = c.tf_raw.unaryExpr([](double v) { return sigmoid(v); })
                .cwiseProduct(c.dtf_raw);
  out.p1 = yp.row(0).transpose();
  out.p2 = yp.row(1).transpose();
  out.dp1 = ydp.row(0).transpose();
  out.dp2 = ydp.row(1).transpose();

  for (const Eigen::VectorXd* v :
       {&out.x1, &out.x2, &out.psi, &out.tf, &out.p1, &out.p2}) {
    if (!v->allFinite()) {
      throw std::runtime_error("forward_batch: non-finite network output");
    }
  }
  return out;
}

void PinnModel::backward_batch(const BatchCache& cache, const BatchEval& bar,
                               std::span<double> state_grad,
                               std::span<double> costate_grad) const {
  const Eigen::Index B = cache.tf_raw.size();
  Eigen::MatrixXd ybar(4, B), ydotbar(4, B);
  ybar.row(0) = pos_scale_ * bar.x1.transpose();
  ybar.row(1) = pos_scale_ * bar.x2.transpose();
  ybar.row(2) = bar.psi.transpose();
  ydotbar.row(0) = pos_scale_ * bar.dx1.transpose();
  ydotbar.row(1) = pos_scale_ * bar.dx2.transpose();
  ydotbar.row(2) = bar.dpsi.transpose();
  // tf = softplus(raw): raw_bar = tf_bar s(raw) + dtf_bar s'(raw) draw,
  // draw_bar = dtf_bar s(raw).
  Eigen::ArrayXd s = cache.tf_raw.array().unaryExpr(
      [](double v) { return sigmoid(v); });
  Eigen::ArrayXd sp = s * (1.0 - s);
  ybar.row(3) = (bar.tf.array() * s +
                 bar.dtf.array() * sp * cache.dtf_raw.array())
                    .matrix()
                    .transpose();
  ydotbar.row(3) = (bar.dtf.array() * s).matrix().transpose();
  state_net_.backward(cache.state, ybar, ydotbar, state_grad);

  Eigen::MatrixXd pbar(2, B), pdotbar(2, B);
  pbar.row(0) = bar.p1.transpose();
  pbar.row(1) = bar.p2.transpose();
  pdotbar.row(0) = bar.dp1.transpose();
  pdotbar.row(1) = bar.dp2.transpose();
  costate_net_.backward(cache.costate, pbar, pdotbar, costate_grad);
}

PinnModel::StateOut PinnModel::forward_state(const std::array<double, 2>& x0,
                                             double tau) const {
  Eigen::Matrix2Xd X0(2, 1);
  X0 << x0[0], x0[1];
  Eigen::VectorXd T(1);
  T << tau;
  const BatchEval e = forward_batch(X0, T);
  return StateOut{{e.x1[0], e.x2[0]}, e.psi[0], e.tf[0]};
}

std::array<double, 2> PinnModel::forward_costate(const std::array<double, 2>& x0,
                                                 double tau) const {
  Eigen::Matrix2Xd X0(2, 1);
  X0 << x0[0], x0[1];
  Eigen::VectorXd T(1);
  T << tau;
  const BatchEval e = forward_batch(X0, T);
  return {e.p1[0], e.p2[0]};
}

double PinnModel::l2_penalty() const {
  return kL2Lambda * costate_net_.weight_sq_sum();
}

void PinnModel::add_l2_penalty_grad(std::span<double> costate_grad) const {
  costate_net_.add_weight_grad(kL2Lambda, costate_grad);
}

namespace {

void write_net(std::FILE* f, const char* name, const Mlp& net) {
  std::fprintf(f, "net %s %d %d %zu\n", name, net.in_dim(), net.out_dim(),
               net.hidden().size());
  for (const LayerSpec& h : net.hidden()) {
    std::fprintf(f, "layer %d %s\n", h.width, act_name(h.act).c_str());
  }
  std::fprintf(f, "params %zu\n", net.param_count());
  for (double p : net.params()) {
    std::fprintf(f, "%a\n", p);
  }
}

Mlp read_net(std::istream& is, const std::string& expect_name) {
  std::string tag, name;
  int in_dim = 0, out_dim = 0;
  std::size_t nhidden = 0;
  if (!(is >> tag >> name >> in_dim >> out_dim >> nhidden) || tag != "net" ||
      name != expect_name) {
    throw std::runtime_error("model file: malformed net header");
  }
  std::vector<LayerSpec> hidden(nhidden);
  for (LayerSpec& h : hidden) {
    std::string act;
    if (!(is >> tag >> h.width >> act) || tag != "layer") {
      throw std::runtime_error("model file: malformed layer line");
    }
    h.act = act_from_name(act);
  }
  Mlp net(in_dim, hidden, out_dim);
  std::size_t count = 0;
  if (!(is >> tag >> count) || tag != "params" || count != net.param_count()) {
    throw std::runtime_error("model file: parameter count mismatch");
  }
  for (std::size_t k = 0; k < count; ++k) {
    std::string tok;
    if (!(is >> tok)) {
      throw std::runtime_error("model file: truncated parameter block");
    }
    char* end = nullptr;
    net.params()[k] = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str()) {
      throw std::runtime_error("model file: bad parameter literal '" + tok + "'");
    }
  }
  return net;
}

}  // namespace

void PinnModel::save(const std::string& path) const {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (f == nullptr) {
    throw std::runtime_error("cannot open model file for writing: " + path);
  }
  std::fprintf(f, "minexp-model v1\n");
  std::fprintf(f, "seed %llu\n", static_cast<unsigned long long>(seed_));
  std::fprintf(f, "pos_scale %a\n", pos_scale_);
  write_net(f, "state", state_net_);
  write_net(f, "costate", costate_net_);
  std::fclose(f);
}

PinnModel PinnModel::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) {
    throw std::runtime_error("cannot open model file: " + path);
  }
  std::string magic, version;
  if (!(is >> magic >> version) || magic != "minexp-model" || version != "v1") {
    throw std::runtime_error("model file: bad header");
  }
  PinnModel m;
  std::string tag;
  unsigned long long seed = 0;
  std::string scale_tok;
  if (!(is >> tag >> seed) || tag != "seed") {
    throw std::runtime_error("model file: missing seed");
  }
  m.seed_ = seed;
  if (!(is >> tag >> scale_tok) || tag != "pos_scale") {
    throw std::runtime_error("model file: missing pos_scale");
  }
  m.pos_scale_ = std::strtod(scale_tok.c_str(), nullptr);
  m.state_net_ = read_net(is, "state");
  m.costate_net_ = read_net(is, "costate");
  return m;
}

}  // namespace minexp
