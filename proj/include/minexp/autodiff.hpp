// Scalar reverse-mode automatic differentiation over a recorded tape.
//
// Every Var is a handle into one Tape. The tape stores, per node, the
// operation kind, parent handles, and a (value, dot) pair. The dot channel
// carries a forward-mode tangent seeded with seed_tangent(); tangent(v)
// materializes d(value(v))/d(seed) as a new node, so expressions containing
// first-order input derivatives can themselves be differentiated with
// gradient() (forward-over-reverse nesting).

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace minexp::ad {

class Tape;

class Var {
 public:
  Var() = default;

  double value() const;
  double dot() const;
  Tape* tape() const { return tape_; }
  std::int32_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::int32_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::int32_t id_ = -1;
};

enum class Op : std::uint8_t {
  kLeaf,
  kConst,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kNeg,
  kSin,
  kCos,
  kExp,
  kLog,
  kTanh,
  kSigmoid,
  kSoftplus,
  kSqrt,
  kAtan2,
  kPowc,     // parent ^ aux, aux a compile-time-fixed real exponent
  kTangent,  // value = parent's dot channel
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(double value);
  Var constant(double value);

  // Overwrites a leaf/const value; call replay() afterwards to propagate.
  void set_value(Var v, double value);
  // Sets the forward tangent of a leaf. Takes effect on nodes recorded
  // afterwards, or on the whole tape after replay().
  void seed_tangent(Var v, double dot = 1.0);
  void clear_tangents();

  // d(value of v) / d(seeded tangent direction), as a differentiable node.
  Var tangent(Var v);

  // Recomputes values and tangents of every node in topological order.
  void replay();

  // Reverse pass from `output`; returns d(output)/d(inputs[i]). Inputs not
  // reachable from the output get derivative 0.
  std::vector<double> gradient(Var output, std::span<const Var> inputs);

  std::size_t size() const { return kind_.size(); }
  std::size_t checkpoint() const { return size(); }
  void rewind(std::size_t mark);

  double value(Var v) const;
  double dot(Var v) const;

  Var record_unary(Op op, Var a);
  Var record_binary(Op op, Var a, Var b);
  Var record_powc(Var a, double exponent);

 private:
  Var push(Op op, std::int32_t p0, std::int32_t p1, double aux);
  void compute(std::size_t i);
  void backprop(std::size_t i);
  void check_owned(Var v, const char* what) const;
  [[noreturn]] void fail(std::size_t node, const std::string& msg) const;

  std::vector<Op> kind_;
  std::vector<std::int32_t> p0_, p1_;
  std::vector<double> aux_;
  std::vector<double> val_, dot_;
  std::vector<double> adj_, adj_dot_;  // reverse-pass scratch
};

Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator/(Var a, Var b);
Var operator-(Var a);

Var operator+(Var a, double b);
Var operator+(double a, Var b);
Var operator-(Var a, double b);
Var operator-(double a, Var b);
Var operator*(Var a, double b);
Var operator*(double a, Var b);
Var operator/(Var a, double b);
Var operator/(double a, Var b);

Var sin(Var a);
Var cos(Var a);
Var exp(Var a);
Var log(Var a);
Var tanh(Var a);
Var sigmoid(Var a);
Var softplus(Var a);
Var sqrt(Var a);
Var atan2(Var y, Var x);
Var pow(Var a, double exponent);
Var pow(Var a, Var b);

}  // namespace minexp::ad
