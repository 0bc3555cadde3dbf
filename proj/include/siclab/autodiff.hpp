#pragma once

// Reverse-mode automatic differentiation over real arrays. A node holds a
// whole row-major matrix (usually an n x 1 signal), so a training graph is a
// few dozen nodes rather than one node per sample. Complex signals travel as
// (re, im) pairs of nodes.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "siclab/frontend.hpp"

namespace siclab::ad {

/// Trainable array together with its gradient accumulator and Adam state.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, std::size_t rows, std::size_t cols);

  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> value;
  std::vector<double> grad;
  std::vector<double> m;  // Adam first moment
  std::vector<double> v;  // Adam second moment
  std::uint64_t steps = 0;

  std::size_t size() const { return value.size(); }
  void zero_grad();
};

class Tape;

/// Handle to a node on a Tape.
class Var {
 public:
  Var() = default;
  std::uint32_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(const Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}
  const Tape* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

/// Complex signal as two real nodes.
struct CVar {
  Var re;
  Var im;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // leaves
  Var constant(std::vector<double> values, std::size_t rows, std::size_t cols = 1);
  Var constant_scalar(double value) { return constant({value}, 1, 1); }
  /// Binds a parameter; backward() accumulates into parameter.grad.
  Var param(Parameter& p);

  // elementwise (same shape)
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double factor);
  /// a[k] * factors[k] with constant factors.
  Var mul_const(Var a, std::vector<double> factors);
  /// a[k] / divisors[k] with constant divisors.
  Var div_const(Var a, std::vector<double> divisors);
  Var tanh(Var a);
  Var square(Var a);

  /// x (n x in) * W (in x out) + b (1 x out) -> n x out
  Var affine(Var x, Var weights, Var bias);
  /// Column j of an n x m node as n x 1.
  Var column(Var x, std::size_t j);
  /// Causal convolution of an n x 1 signal with L taps, truncated to n.
  Var conv(Var x, Var taps);

  // reductions to a scalar
  Var sum(Var a);
  Var mean(Var a);
  /// sum over samples of (re^2 + im^2), divided by the sample count.
  Var mean_square(CVar r);

  /// Forward identity, backward zero.
  Var stop_gradient(Var a);
  /// Clipping to [-lambda, lambda]. The backward multiplier is the indicator
  /// |output| < lambda.
  Var saturation(Var a, double lambda);
  /// Same forward clip, but the backward indicator is evaluated on `observed`
  /// (the digitized values downstream) instead of the clip output.
  Var saturation(Var a, double lambda, std::span<const double> observed);
  /// ADC noise block: forward value is adc_quantize(a) exactly, backward is
  /// the identity. Equivalent to a + SG(ADC{a} - a).
  Var adc_noise(Var a, const frontend::AdcSpec& spec);

  // complex helpers built from the primitives above
  CVar cconstant(std::span<const cplx> values);
  CVar cadd(CVar a, CVar b);
  CVar csub(CVar a, CVar b);
  /// (a.re b.re - a.im b.im, a.re b.im + a.im b.re)
  CVar cmul(CVar a, CVar b);
  CVar cconv(CVar x, CVar taps);
  CVar cscale(CVar a, double factor);

  /// Reverse pass from a scalar node. Adjoints are cleared first.
  void backward(Var loss);
  /// Reverse pass from an arbitrary node seeded with `seed` (a vector-Jacobian
  /// product).
  void backward(Var out, std::span<const double> seed);
  /// Same with several seeded outputs at once.
  void backward(std::span<const Var> outs, std::span<const std::vector<double>> seeds);

  std::span<const double> value(Var v) const;
  double scalar(Var v) const;
  /// Valid after backward(); all-zero for nodes not reached.
  std::span<const double> adjoint(Var v) const;
  std::size_t rows(Var v) const;
  std::size_t cols(Var v) const;
  std::size_t size() const { return nodes_.size(); }
  ComplexSequence cvalue(CVar v) const;

 private:
  enum class Op : std::uint8_t {
    Constant, Param, Add, Sub, Mul, Scale, MulConst, DivConst, Tanh, Affine, Column, Conv,
    Sum, Mean, MeanSquare, StopGradient, Saturation, AdcNoise,
  };

  struct Node {
    Op op = Op::Constant;
    std::uint32_t in[3] = {0, 0, 0};
    std::uint8_t nin = 0;
    bool requires_grad = false;
    std::size_t rows = 0, cols = 0;
    double k = 0.0;                   // scale factor / lambda / column index
    std::vector<double> value;
    std::vector<double> aux;          // constant factors or backward mask
    std::vector<double> adjoint;
    Parameter* param = nullptr;
  };

  Node& node(Var v);
  const Node& node(Var v) const;
  Var push(Node n);
  void check_same_shape(const Node& a, const Node& b, const char* op) const;
  void run_backward(std::uint32_t from);

  std::vector<Node> nodes_;
};

struct AdamConfig {
  double lr = 0.03;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected Adam update on each parameter from its current grad.
void adam_step(std::span<Parameter* const> params, const AdamConfig& cfg);

}  // namespace siclab::ad
