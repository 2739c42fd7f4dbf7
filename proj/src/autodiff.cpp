#include "minexp/autodiff.hpp"

#include <cmath>
#include <stdexcept>

namespace minexp::ad {
namespace {

const char* op_name(Op op) {
  switch (op) {
    case Op::kLeaf: return "leaf";
    case Op::kConst: return "const";
    case Op::kAdd: return "add";
    case Op::kSub: return "sub";
    case Op::kMul: return "mul";
    case Op::kDiv: return "div";
    case Op::kNeg: return "neg";
    case Op::kSin: return "sin";
    case Op::kCos: return "cos";
    case Op::kExp: return "exp";
    case Op::kLog: return "log";
    case Op::kTanh: return "tanh";
    case Op::kSigmoid: return "sigmoid";
    case Op::kSoftplus: return "softplus";
    case Op::kSqrt: return "sqrt";
    case Op::kAtan2: return "atan2";
    case Op::kPowc: return "pow";
    case Op::kTangent: return "tangent";
  }
  return "?";
}

double sigmoid_val(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus_val(double x) {
  // log(1 + e^x) without overflow for large |x|.
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

}  // namespace

double Var::value() const { return tape_->value(*this); }
double Var::dot() const { return tape_->dot(*this); }

void Tape::check_owned(Var v, const char* what) const {
  if (v.tape() != this || v.id() < 0 ||
      static_cast<std::size_t>(v.id()) >= size()) {
    throw std::invalid_argument(std::string("autodiff: ") + what +
                                " does not belong to this tape");
  }
}

void Tape::fail(std::size_t node, const std::string& msg) const {
  throw std::domain_error("autodiff: node " + std::to_string(node) + " (" +
                          op_name(kind_[node]) + "): " + msg);
}

Var Tape::push(Op op, std::int32_t p0, std::int32_t p1, double aux) {
  kind_.push_back(op);
  p0_.push_back(p0);
  p1_.push_back(p1);
  aux_.push_back(aux);
  val_.push_back(0.0);
  dot_.push_back(0.0);
  const std::size_t i = size() - 1;
  compute(i);
  if (!std::isfinite(val_[i])) {
    fail(i, "non-finite value " + std::to_string(val_[i]));
  }
  return Var(this, static_cast<std::int32_t>(i));
}

Var Tape::leaf(double value) {
  Var v = push(Op::kLeaf, -1, -1, 0.0);
  val_[v.id()] = value;
  return v;
}

Var Tape::constant(double value) {
  Var v = push(Op::kConst, -1, -1, 0.0);
  val_[v.id()] = value;
  return v;
}

void Tape::set_value(Var v, double value) {
  check_owned(v, "set_value target");
  if (kind_[v.id()] != Op::kLeaf && kind_[v.id()] != Op::kConst) {
    throw std::invalid_argument("autodiff: set_value on a non-leaf node");
  }
  val_[v.id()] = value;
}

void Tape::seed_tangent(Var v, double dot) {
  check_owned(v, "seed_tangent target");
  if (kind_[v.id()] != Op::kLeaf) {
    throw std::invalid_argument("autodiff: seed_tangent on a non-leaf node");
  }
  dot_[v.id()] = dot;
}

void Tape::clear_tangents() {
  for (std::size_t i = 0; i < size(); ++i) {
    if (kind_[i] == Op::kLeaf) dot_[i] = 0.0;
  }
}

Var Tape::tangent(Var v) {
  check_owned(v, "tangent argument");
  return push(Op::kTangent, v.id(), -1, 0.0);
}

Var Tape::record_unary(Op op, Var a) {
  check_owned(a, "operand");
  return push(op, a.id(), -1, 0.0);
}

Var Tape::record_binary(Op op, Var a, Var b) {
  check_owned(a, "operand");
  check_owned(b, "operand");
  return push(op, a.id(), b.id(), 0.0);
}

Var Tape::record_powc(Var a, double exponent) {
  check_owned(a, "operand");
  return push(Op::kPowc, a.id(), -1, exponent);
}

double Tape::value(Var v) const {
  check_owned(v, "value query");
  return val_[v.id()];
}

double Tape::dot(Var v) const {
  check_owned(v, "dot query");
  return dot_[v.id()];
}

void Tape::rewind(std::size_t mark) {
  if (mark > size()) {
    throw std::invalid_argument("autodiff: rewind past the end of the tape");
  }
  kind_.resize(mark);
  p0_.resize(mark);
  p1_.resize(mark);
  aux_.resize(mark);
  val_.resize(mark);
  dot_.resize(mark);
}

void Tape::compute(std::size_t i) {
  const std::int32_t a = p0_[i];
  const std::int32_t b = p1_[i];
  switch (kind_[i]) {
    case Op::kLeaf:
    case Op::kConst:
      break;
    case Op::kAdd:
      val_[i] = val_[a] + val_[b];
      dot_[i] = dot_[a] + dot_[b];
      break;
    case Op::kSub:
      val_[i] = val_[a] - val_[b];
      dot_[i] = dot_[a] - dot_[b];
      break;
    case Op::kMul:
      val_[i] = val_[a] * val_[b];
      dot_[i] = dot_[a] * val_[b] + val_[a] * dot_[b];
      break;
    case Op::kDiv:
      if (val_[b] == 0.0) fail(i, "division by zero");
      val_[i] = val_[a] / val_[b];
      dot_[i] = (dot_[a] - val_[i] * dot_[b]) / val_[b];
      break;
    case Op::kNeg:
      val_[i] = -val_[a];
      dot_[i] = -dot_[a];
      break;
    case Op::kSin:
      val_[i] = std::sin(val_[a]);
      dot_[i] = std::cos(val_[a]) * dot_[a];
      break;
    case Op::kCos:
      val_[i] = std::cos(val_[a]);
      dot_[i] = -std::sin(val_[a]) * dot_[a];
      break;
    case Op::kExp:
      val_[i] = std::exp(val_[a]);
      dot_[i] = val_[i] * dot_[a];
      break;
    case Op::kLog:
      if (val_[a] <= 0.0) fail(i, "log of non-positive argument");
      val_[i] = std::log(val_[a]);
      dot_[i] = dot_[a] / val_[a];
      break;
    case Op::kTanh: {
      const double t = std::tanh(val_[a]);
      val_[i] = t;
      dot_[i] = (1.0 - t * t) * dot_[a];
      break;
    }
    case Op::kSigmoid: {
      const double s = sigmoid_val(val_[a]);
      val_[i] = s;
      dot_[i] = s * (1.0 - s) * dot_[a];
      break;
    }
    case Op::kSoftplus:
      val_[i] = softplus_val(val_[a]);
      dot_[i] = sigmoid_val(val_[a]) * dot_[a];
      break;
    case Op::kSqrt:
      if (val_[a] < 0.0) fail(i, "sqrt of negative argument");
      val_[i] = std::sqrt(val_[a]);
      dot_[i] = val_[i] == 0.0 ? 0.0 : 0.5 / val_[i] * dot_[a];
      break;
    case Op::kAtan2: {
      const double y = val_[a];
      const double x = val_[b];
      const double r2 = y * y + x * x;
      if (r2 == 0.0) fail(i, "atan2(0, 0)");
      val_[i] = std::atan2(y, x);
      dot_[i] = (x * dot_[a] - y * dot_[b]) / r2;
      break;
    }
    case Op::kPowc: {
      const double n = aux_[i];
      val_[i] = std::pow(val_[a], n);
      dot_[i] = n * std::pow(val_[a], n - 1.0) * dot_[a];
      break;
    }
    case Op::kTangent:
      val_[i] = dot_[a];
      dot_[i] = 0.0;
      break;
  }
}

void Tape::replay() {
  for (std::size_t i = 0; i < size(); ++i) {
    compute(i);
    if (!std::isfinite(val_[i])) {
      fail(i, "non-finite value during replay");
    }
  }
}

// Adjoint rules for the augmented (value, dot) graph. With c = f(a, b),
// dot_c = f_a dot_a + f_b dot_b, and L the final scalar:
//   adj(a)     += adj(c) f_a + adj_dot(c) (f_aa dot_a + f_ab dot_b)
//   adj_dot(a) += adj_dot(c) f_a
void Tape::backprop(std::size_t i) {
  const std::int32_t a = p0_[i];
  const std::int32_t b = p1_[i];
  const double g = adj_[i];
  const double gd = adj_dot_[i];
  if (g == 0.0 && gd == 0.0) return;
  switch (kind_[i]) {
    case Op::kLeaf:
    case Op::kConst:
      break;
    case Op::kAdd:
      adj_[a] += g;
      adj_dot_[a] += gd;
      adj_[b] += g;
      adj_dot_[b] += gd;
      break;
    case Op::kSub:
      adj_[a] += g;
      adj_dot_[a] += gd;
      adj_[b] -= g;
      adj_dot_[b] -= gd;
      break;
    case Op::kMul:
      adj_[a] += g * val_[b] + gd * dot_[b];
      adj_dot_[a] += gd * val_[b];
      adj_[b] += g * val_[a] + gd * dot_[a];
      adj_dot_[b] += gd * val_[a];
      break;
    case Op::kDiv: {
      const double bv = val_[b];
      const double av = val_[a];
      adj_[a] += g / bv - gd * dot_[b] / (bv * bv);
      adj_dot_[a] += gd / bv;
      adj_[b] += -g * av / (bv * bv) +
                 gd * (-dot_[a] / (bv * bv) + 2.0 * av * dot_[b] / (bv * bv * bv));
      adj_dot_[b] += -gd * av / (bv * bv);
      break;
    }
    case Op::kNeg:
      adj_[a] -= g;
      adj_dot_[a] -= gd;
      break;
    case Op::kSin: {
      const double fp = std::cos(val_[a]);
      const double fpp = -std::sin(val_[a]);
      adj_[a] += g * fp + gd * fpp * dot_[a];
      adj_dot_[a] += gd * fp;
      break;
    }
    case Op::kCos: {
      const double fp = -std::sin(val_[a]);
      const double fpp = -std::cos(val_[a]);
      adj_[a] += g * fp + gd * fpp * dot_[a];
      adj_dot_[a] += gd * fp;
      break;
    }
    case Op::kExp: {
      const double fp = val_[i];
      adj_[a] += g * fp + gd * fp * dot_[a];
      adj_dot_[a] += gd * fp;
      break;
    }
    case Op::kLog: {
      const double fp = 1.0 / val_[a];
      const double fpp = -fp * fp;
      adj_[a] += g * fp + gd * fpp * dot_[a];
      adj_dot_[a] += gd * fp;
      break;
    }
    case Op::kTanh: {
      const double t = val_[i];
      const double fp = 1.0 - t * t;
      const double fpp = -2.0 * t * fp;
      adj_[a] += g * fp + gd * fpp * dot_[a];
      adj_dot_[a] += gd * fp;
      break;
    }
    case Op::kSigmoid: {
      const double s = val_[i];
      const double fp = s * (1.0 - s);
      const double fpp = fp * (1.0 - 2.0 * s);
      adj_[a] += g * fp + gd * fpp * dot_[a];
      adj_dot_[a] += gd * fp;
      break;
    }
    case Op::kSoftplus: {
      const double s = sigmoid_val(val_[a]);
      const double fpp = s * (1.0 - s);
      adj_[a] += g * s + gd * fpp * dot_[a];
      adj_dot_[a] += gd * s;
      break;
    }
    case Op::kSqrt: {
      const double r = val_[i];
      const double fp = 0.5 / r;
      const double fpp = -0.25 / (r * r * r);
      adj_[a] += g * fp + gd * fpp * dot_[a];
      adj_dot_[a] += gd * fp;
      break;
    }
    case Op::kAtan2: {
      const double y = val_[a];
      const double x = val_[b];
      const double r2 = y * y + x * x;
      const double fy = x / r2;
      const double fx = -y / r2;
      const double fyy = -2.0 * x * y / (r2 * r2);
      const double fyx = (y * y - x * x) / (r2 * r2);
      const double fxx = 2.0 * x * y / (r2 * r2);
      adj_[a] += g * fy + gd * (fyy * dot_[a] + fyx * dot_[b]);
      adj_dot_[a] += gd * fy;
      adj_[b] += g * fx + gd * (fyx * dot_[a] + fxx * dot_[b]);
      adj_dot_[b] += gd * fx;
      break;
    }
    case Op::kPowc: {
      const double n = aux_[i];
      const double fp = n * std::pow(val_[a], n - 1.0);
      const double fpp = n * (n - 1.0) * std::pow(val_[a], n - 2.0);
      adj_[a] += g * fp + gd * fpp * dot_[a];
      adj_dot_[a] += gd * fp;
      break;
    }
    case Op::kTangent:
      // value of this node is dot(a): the adjoint lands on a's dot channel.
      adj_dot_[a] += g;
      break;
  }
}

std::vector<double> Tape::gradient(Var output, std::span<const Var> inputs) {
  check_owned(output, "gradient output");
  for (const Var& v : inputs) check_owned(v, "gradient input");
  adj_.assign(size(), 0.0);
  adj_dot_.assign(size(), 0.0);
  adj_[output.id()] = 1.0;
  for (std::size_t k = output.id() + 1; k-- > 0;) {
    backprop(k);
  }
  std::vector<double> out(inputs.size());
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    out[k] = adj_[inputs[k].id()];
    if (!std::isfinite(out[k])) {
      fail(inputs[k].id(), "non-finite gradient");
    }
  }
  return out;
}

namespace {
Tape* same_tape(Var a, Var b) {
  if (a.tape() != b.tape()) {
    throw std::invalid_argument("autodiff: operands belong to different tapes");
  }
  return a.tape();
}
}  // namespace

Var operator+(Var a, Var b) { return same_tape(a, b)->record_binary(Op::kAdd, a, b); }
Var operator-(Var a, Var b) { return same_tape(a, b)->record_binary(Op::kSub, a, b); }
Var operator*(Var a, Var b) { return same_tape(a, b)->record_binary(Op::kMul, a, b); }
Var operator/(Var a, Var b) { return same_tape(a, b)->record_binary(Op::kDiv, a, b); }
Var operator-(Var a) { return a.tape()->record_unary(Op::kNeg, a); }

Var operator+(Var a, double b) { return a + a.tape()->constant(b); }
Var operator+(double a, Var b) { return b.tape()->constant(a) + b; }
Var operator-(Var a, double b) { return a - a.tape()->constant(b); }
Var operator-(double a, Var b) { return b.tape()->constant(a) - b; }
Var operator*(Var a, double b) { return a * a.tape()->constant(b); }
Var operator*(double a, Var b) { return b.tape()->constant(a) * b; }
Var operator/(Var a, double b) { return a / a.tape()->constant(b); }
Var operator/(double a, Var b) { return b.tape()->constant(a) / b; }

Var sin(Var a) { return a.tape()->record_unary(Op::kSin, a); }
Var cos(Var a) { return a.tape()->record_unary(Op::kCos, a); }
Var exp(Var a) { return a.tape()->record_unary(Op::kExp, a); }
Var log(Var a) { return a.tape()->record_unary(Op::kLog, a); }
Var tanh(Var a) { return a.tape()->record_unary(Op::kTanh, a); }
Var sigmoid(Var a) { return a.tape()->record_unary(Op::kSigmoid, a); }
Var softplus(Var a) { return a.tape()->record_unary(Op::kSoftplus, a); }
Var sqrt(Var a) { return a.tape()->record_unary(Op::kSqrt, a); }
Var atan2(Var y, Var x) { return same_tape(y, x)->record_binary(Op::kAtan2, y, x); }
Var pow(Var a, double exponent) { return a.tape()->record_powc(a, exponent); }
Var pow(Var a, Var b) { return exp(b * log(a)); }

}  // namespace minexp::ad
