#include "siclab/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace siclab::ad {

Parameter::Parameter(std::string name_, std::size_t rows_, std::size_t cols_)
    : name(std::move(name_)),
      rows(rows_),
      cols(cols_),
      value(rows_ * cols_, 0.0),
      grad(rows_ * cols_, 0.0),
      m(rows_ * cols_, 0.0),
      v(rows_ * cols_, 0.0) {}

void Parameter::zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

Tape::Node& Tape::node(Var v) {
  if (v.tape_ != this || v.id_ >= nodes_.size()) throw InvalidArgument("autodiff: variable from another tape");
  return nodes_[v.id_];
}

const Tape::Node& Tape::node(Var v) const {
  if (v.tape_ != this || v.id_ >= nodes_.size()) throw InvalidArgument("autodiff: variable from another tape");
  return nodes_[v.id_];
}

Var Tape::push(Node n) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  for (std::uint8_t i = 0; i < n.nin; ++i)
    if (n.in[i] >= id) throw Error("autodiff: cycle in graph");
  nodes_.push_back(std::move(n));
  return Var(this, id);
}

void Tape::check_same_shape(const Node& a, const Node& b, const char* op) const {
  if (a.rows != b.rows || a.cols != b.cols) throw InvalidArgument(std::string("autodiff: shape mismatch in ") + op);
}

Var Tape::constant(std::vector<double> values, std::size_t rows, std::size_t cols) {
  if (values.size() != rows * cols) throw InvalidArgument("autodiff: constant shape mismatch");
  Node n;
  n.op = Op::Constant;
  n.rows = rows;
  n.cols = cols;
  n.value = std::move(values);
  return push(std::move(n));
}

Var Tape::param(Parameter& p) {
  Node n;
  n.op = Op::Param;
  n.rows = p.rows;
  n.cols = p.cols;
  n.value = p.value;
  n.param = &p;
  n.requires_grad = true;
  return push(std::move(n));
}

namespace {
template <class F>
std::vector<double> zip(const std::vector<double>& a, const std::vector<double>& b, F f) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i], b[i]);
  return out;
}
}  // namespace

#define SICLAB_BINARY(NAME, OP, EXPR)                             \
  Var Tape::NAME(Var a, Var b) {                                  \
    const Node& na = node(a);                                     \
    const Node& nb = node(b);                                     \
    check_same_shape(na, nb, #NAME);                              \
    Node n;                                                       \
    n.op = Op::OP;                                                \
    n.in[0] = a.id_;                                              \
    n.in[1] = b.id_;                                              \
    n.nin = 2;                                                    \
    n.rows = na.rows;                                             \
    n.cols = na.cols;                                             \
    n.requires_grad = na.requires_grad || nb.requires_grad;       \
    n.value = zip(na.value, nb.value, [](double x, double y) { return EXPR; }); \
    return push(std::move(n));                                    \
  }

SICLAB_BINARY(add, Add, x + y)
SICLAB_BINARY(sub, Sub, x - y)
SICLAB_BINARY(mul, Mul, x* y)
#undef SICLAB_BINARY

Var Tape::scale(Var a, double factor) {
  const Node& na = node(a);
  Node n;
  n.op = Op::Scale;
  n.in[0] = a.id_;
  n.nin = 1;
  n.rows = na.rows;
  n.cols = na.cols;
  n.k = factor;
  n.requires_grad = na.requires_grad;
  n.value.resize(na.value.size());
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] = na.value[i] * factor;
  return push(std::move(n));
}

Var Tape::mul_const(Var a, std::vector<double> factors) {
  const Node& na = node(a);
  if (factors.size() != na.value.size()) throw InvalidArgument("autodiff: mul_const size mismatch");
  Node n;
  n.op = Op::MulConst;
  n.in[0] = a.id_;
  n.nin = 1;
  n.rows = na.rows;
  n.cols = na.cols;
  n.requires_grad = na.requires_grad;
  n.value.resize(na.value.size());
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] = na.value[i] * factors[i];
  n.aux = std::move(factors);
  return push(std::move(n));
}

Var Tape::div_const(Var a, std::vector<double> divisors) {
  const Node& na = node(a);
  if (divisors.size() != na.value.size()) throw InvalidArgument("autodiff: div_const size mismatch");
  Node n;
  n.op = Op::DivConst;
  n.in[0] = a.id_;
  n.nin = 1;
  n.rows = na.rows;
  n.cols = na.cols;
  n.requires_grad = na.requires_grad;
  n.value.resize(na.value.size());
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] = na.value[i] / divisors[i];
  n.aux = std::move(divisors);
  return push(std::move(n));
}

Var Tape::tanh(Var a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::Tanh;
  n.in[0] = a.id_;
  n.nin = 1;
  n.rows = na.rows;
  n.cols = na.cols;
  n.requires_grad = na.requires_grad;
  n.value.resize(na.value.size());
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] = std::tanh(na.value[i]);
  return push(std::move(n));
}

Var Tape::square(Var a) { return mul(a, a); }

Var Tape::affine(Var x, Var weights, Var bias) {
  const Node& nx = node(x);
  const Node& nw = node(weights);
  const Node& nb = node(bias);
  if (nw.rows != nx.cols) throw InvalidArgument("autodiff: affine inner dimension mismatch");
  if (nb.value.size() != nw.cols) throw InvalidArgument("autodiff: affine bias size mismatch");
  const std::size_t rows = nx.rows, in = nx.cols, out = nw.cols;
  Node n;
  n.op = Op::Affine;
  n.in[0] = x.id_;
  n.in[1] = weights.id_;
  n.in[2] = bias.id_;
  n.nin = 3;
  n.rows = rows;
  n.cols = out;
  n.requires_grad = nx.requires_grad || nw.requires_grad || nb.requires_grad;
  n.value.resize(rows * out);
  for (std::size_t i = 0; i < rows; ++i) {
    double* y = &n.value[i * out];
    for (std::size_t o = 0; o < out; ++o) y[o] = nb.value[o];
    for (std::size_t j = 0; j < in; ++j) {
      const double xv = nx.value[i * in + j];
      const double* w = &nw.value[j * out];
      for (std::size_t o = 0; o < out; ++o) y[o] += xv * w[o];
    }
  }
  return push(std::move(n));
}

Var Tape::column(Var x, std::size_t j) {
  const Node& nx = node(x);
  if (j >= nx.cols) throw InvalidArgument("autodiff: column index out of range");
  Node n;
  n.op = Op::Column;
  n.in[0] = x.id_;
  n.nin = 1;
  n.rows = nx.rows;
  n.cols = 1;
  n.k = static_cast<double>(j);
  n.requires_grad = nx.requires_grad;
  n.value.resize(nx.rows);
  for (std::size_t i = 0; i < nx.rows; ++i) n.value[i] = nx.value[i * nx.cols + j];
  return push(std::move(n));
}

Var Tape::conv(Var x, Var taps) {
  const Node& nx = node(x);
  const Node& nh = node(taps);
  if (nx.cols != 1 || nh.cols != 1) throw InvalidArgument("autodiff: conv expects column vectors");
  if (nh.rows == 0) throw InvalidArgument("autodiff: conv with empty taps");
  const std::size_t len = nx.rows;
  Node n;
  n.op = Op::Conv;
  n.in[0] = x.id_;
  n.in[1] = taps.id_;
  n.nin = 2;
  n.rows = len;
  n.cols = 1;
  n.requires_grad = nx.requires_grad || nh.requires_grad;
  n.value.assign(len, 0.0);
  const double* xv = nx.value.data();
  double* y = n.value.data();
  for (std::size_t m = 0; m < nh.rows && m < len; ++m) {
    const double h = nh.value[m];
    for (std::size_t k = m; k < len; ++k) y[k] += h * xv[k - m];
  }
  return push(std::move(n));
}

Var Tape::sum(Var a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::Sum;
  n.in[0] = a.id_;
  n.nin = 1;
  n.rows = n.cols = 1;
  n.requires_grad = na.requires_grad;
  double acc = 0.0;
  for (double v : na.value) acc += v;
  n.value = {acc};
  return push(std::move(n));
}

Var Tape::mean(Var a) {
  const Node& na = node(a);
  if (na.value.empty()) throw InvalidArgument("autodiff: mean of empty node");
  Node n;
  n.op = Op::Mean;
  n.in[0] = a.id_;
  n.nin = 1;
  n.rows = n.cols = 1;
  n.requires_grad = na.requires_grad;
  double acc = 0.0;
  for (double v : na.value) acc += v;
  n.value = {acc / static_cast<double>(na.value.size())};
  return push(std::move(n));
}

Var Tape::mean_square(CVar r) {
  const Node& re = node(r.re);
  const Node& im = node(r.im);
  check_same_shape(re, im, "mean_square");
  if (re.value.empty()) throw InvalidArgument("autodiff: mean_square of empty signal");
  Node n;
  n.op = Op::MeanSquare;
  n.in[0] = r.re.id_;
  n.in[1] = r.im.id_;
  n.nin = 2;
  n.rows = n.cols = 1;
  n.requires_grad = re.requires_grad || im.requires_grad;
  double acc = 0.0;
  for (std::size_t i = 0; i < re.value.size(); ++i) acc += re.value[i] * re.value[i] + im.value[i] * im.value[i];
  n.k = 1.0 / static_cast<double>(re.value.size());
  n.value = {acc * n.k};
  return push(std::move(n));
}

Var Tape::stop_gradient(Var a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::StopGradient;
  n.in[0] = a.id_;
  n.nin = 1;
  n.rows = na.rows;
  n.cols = na.cols;
  n.value = na.value;
  n.requires_grad = false;
  return push(std::move(n));
}

Var Tape::saturation(Var a, double lambda) {
  const Node& na = node(a);
  std::vector<double> clipped(na.value.size());
  for (std::size_t i = 0; i < clipped.size(); ++i) clipped[i] = frontend::clip_g(na.value[i], lambda);
  return saturation(a, lambda, clipped);
}

Var Tape::saturation(Var a, double lambda, std::span<const double> observed) {
  const Node& na = node(a);
  if (observed.size() != na.value.size()) throw InvalidArgument("autodiff: saturation observation size mismatch");
  Node n;
  n.op = Op::Saturation;
  n.in[0] = a.id_;
  n.nin = 1;
  n.rows = na.rows;
  n.cols = na.cols;
  n.k = lambda;
  n.requires_grad = na.requires_grad;
  n.value.resize(na.value.size());
  n.aux.resize(na.value.size());
  for (std::size_t i = 0; i < n.value.size(); ++i) {
    n.value[i] = frontend::clip_g(na.value[i], lambda);
    n.aux[i] = std::abs(observed[i]) < lambda ? 1.0 : 0.0;
  }
  return push(std::move(n));
}

Var Tape::adc_noise(Var a, const frontend::AdcSpec& spec) {
  const Node& na = node(a);
  Node n;
  n.op = Op::AdcNoise;
  n.in[0] = a.id_;
  n.nin = 1;
  n.rows = na.rows;
  n.cols = na.cols;
  n.requires_grad = na.requires_grad;
  n.value.resize(na.value.size());
  frontend::adc_quantize(spec, na.value, n.value);
  return push(std::move(n));
}

CVar Tape::cconstant(std::span<const cplx> values) {
  std::vector<double> re(values.size()), im(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    re[i] = values[i].real();
    im[i] = values[i].imag();
  }
  const std::size_t n = values.size();
  return {constant(std::move(re), n), constant(std::move(im), n)};
}

CVar Tape::cadd(CVar a, CVar b) { return {add(a.re, b.re), add(a.im, b.im)}; }
CVar Tape::csub(CVar a, CVar b) { return {sub(a.re, b.re), sub(a.im, b.im)}; }
CVar Tape::cmul(CVar a, CVar b) {
  return {sub(mul(a.re, b.re), mul(a.im, b.im)), add(mul(a.re, b.im), mul(a.im, b.re))};
}
CVar Tape::cconv(CVar x, CVar taps) {
  return {sub(conv(x.re, taps.re), conv(x.im, taps.im)), add(conv(x.re, taps.im), conv(x.im, taps.re))};
}
CVar Tape::cscale(CVar a, double factor) { return {scale(a.re, factor), scale(a.im, factor)}; }

void Tape::backward(Var loss) {
  const Node& n = node(loss);
  if (n.value.size() != 1) throw InvalidArgument("autodiff: backward() needs a scalar loss");
  const double one = 1.0;
  backward(loss, std::span<const double>(&one, 1));
}

void Tape::backward(Var out, std::span<const double> seed) {
  const std::vector<double> copy(seed.begin(), seed.end());
  backward(std::span<const Var>(&out, 1), std::span<const std::vector<double>>(&copy, 1));
}

void Tape::backward(std::span<const Var> outs, std::span<const std::vector<double>> seeds) {
  if (outs.empty() || outs.size() != seeds.size()) throw InvalidArgument("autodiff: one seed per output required");
  for (std::size_t i = 0; i < outs.size(); ++i)
    if (seeds[i].size() != node(outs[i]).value.size()) throw InvalidArgument("autodiff: seed size mismatch");
  for (auto& nd : nodes_) nd.adjoint.assign(nd.value.size(), 0.0);
  std::uint32_t last = 0;
  for (std::size_t i = 0; i < outs.size(); ++i) {
    auto& adj = node(outs[i]).adjoint;
    for (std::size_t k = 0; k < adj.size(); ++k) adj[k] += seeds[i][k];
    last = std::max(last, outs[i].id_);
  }
  run_backward(last);
}

void Tape::run_backward(std::uint32_t from) {
  for (std::int64_t id = from; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.requires_grad) continue;
    const auto& g = n.adjoint;
    auto in = [&](int i) -> Node& { return nodes_[n.in[i]]; };
    switch (n.op) {
      case Op::Constant:
      case Op::StopGradient:
        break;
      case Op::Param: {
        auto& pg = n.param->grad;
        for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i];
        break;
      }
      case Op::Add: {
        for (int s = 0; s < 2; ++s) {
          Node& a = in(s);
          if (!a.requires_grad) continue;
          for (std::size_t i = 0; i < g.size(); ++i) a.adjoint[i] += g[i];
        }
        break;
      }
      case Op::Sub: {
        Node& a = in(0);
        Node& b = in(1);
        if (a.requires_grad)
          for (std::size_t i = 0; i < g.size(); ++i) a.adjoint[i] += g[i];
        if (b.requires_grad)
          for (std::size_t i = 0; i < g.size(); ++i) b.adjoint[i] -= g[i];
        break;
      }
      case Op::Mul: {
        Node& a = in(0);
        Node& b = in(1);
        if (a.requires_grad)
          for (std::size_t i = 0; i < g.size(); ++i) a.adjoint[i] += g[i] * b.value[i];
        if (b.requires_grad)
          for (std::size_t i = 0; i < g.size(); ++i) b.adjoint[i] += g[i] * a.value[i];
        break;
      }
      case Op::Scale: {
        Node& a = in(0);
        for (std::size_t i = 0; i < g.size(); ++i) a.adjoint[i] += g[i] * n.k;
        break;
      }
      case Op::DivConst: {
        Node& a = in(0);
        for (std::size_t i = 0; i < g.size(); ++i) a.adjoint[i] += g[i] / n.aux[i];
        break;
      }
      case Op::MulConst:
      case Op::Saturation: {
        Node& a = in(0);
        for (std::size_t i = 0; i < g.size(); ++i) a.adjoint[i] += g[i] * n.aux[i];
        break;
      }
      case Op::AdcNoise: {
        Node& a = in(0);
        for (std::size_t i = 0; i < g.size(); ++i) a.adjoint[i] += g[i];
        break;
      }
      case Op::Tanh: {
        Node& a = in(0);
        for (std::size_t i = 0; i < g.size(); ++i) a.adjoint[i] += g[i] * (1.0 - n.value[i] * n.value[i]);
        break;
      }
      case Op::Affine: {
        Node& x = in(0);
        Node& w = in(1);
        Node& b = in(2);
        const std::size_t rows = n.rows, out = n.cols, inner = x.cols;
        for (std::size_t i = 0; i < rows; ++i) {
          const double* gy = &g[i * out];
          if (b.requires_grad)
            for (std::size_t o = 0; o < out; ++o) b.adjoint[o] += gy[o];
          for (std::size_t j = 0; j < inner; ++j) {
            const double* wr = &w.value[j * out];
            if (x.requires_grad) {
              double acc = 0.0;
              for (std::size_t o = 0; o < out; ++o) acc += gy[o] * wr[o];
              x.adjoint[i * inner + j] += acc;
            }
            if (w.requires_grad) {
              const double xv = x.value[i * inner + j];
              double* gw = &w.adjoint[j * out];
              for (std::size_t o = 0; o < out; ++o) gw[o] += xv * gy[o];
            }
          }
        }
        break;
      }
      case Op::Column: {
        Node& x = in(0);
        const auto j = static_cast<std::size_t>(n.k);
        for (std::size_t i = 0; i < n.rows; ++i) x.adjoint[i * x.cols + j] += g[i];
        break;
      }
      case Op::Conv: {
        Node& x = in(0);
        Node& h = in(1);
        const std::size_t len = n.rows;
        for (std::size_t m = 0; m < h.rows && m < len; ++m) {
          if (x.requires_grad) {
            const double hm = h.value[m];
            double* gx = x.adjoint.data();
            for (std::size_t k = m; k < len; ++k) gx[k - m] += hm * g[k];
          }
          if (h.requires_grad) {
            // correlation of the input with the output adjoint
            const double* xv = x.value.data();
            double acc[4] = {0.0, 0.0, 0.0, 0.0};
            std::size_t k = m;
            for (; k + 4 <= len; k += 4)
              for (int j = 0; j < 4; ++j) acc[j] += g[k + j] * xv[k + j - m];
            for (; k < len; ++k) acc[0] += g[k] * xv[k - m];
            h.adjoint[m] += (acc[0] + acc[1]) + (acc[2] + acc[3]);
          }
        }
        break;
      }
      case Op::Sum: {
        Node& a = in(0);
        for (auto& v : a.adjoint) v += g[0];
        break;
      }
      case Op::Mean: {
        Node& a = in(0);
        const double share = g[0] / static_cast<double>(a.adjoint.size());
        for (auto& v : a.adjoint) v += share;
        break;
      }
      case Op::MeanSquare: {
        const double f = 2.0 * n.k * g[0];
        for (int s = 0; s < 2; ++s) {
          Node& a = in(s);
          if (!a.requires_grad) continue;
          for (std::size_t i = 0; i < a.value.size(); ++i) a.adjoint[i] += f * a.value[i];
        }
        break;
      }
    }
  }
}

std::span<const double> Tape::value(Var v) const { return node(v).value; }

double Tape::scalar(Var v) const {
  const auto& n = node(v);
  if (n.value.size() != 1) throw InvalidArgument("autodiff: node is not a scalar");
  return n.value[0];
}

std::span<const double> Tape::adjoint(Var v) const { return node(v).adjoint; }
std::size_t Tape::rows(Var v) const { return node(v).rows; }
std::size_t Tape::cols(Var v) const { return node(v).cols; }

ComplexSequence Tape::cvalue(CVar v) const {
  const auto re = value(v.re);
  const auto im = value(v.im);
  ComplexSequence out(re.size());
  for (std::size_t i = 0; i < re.size(); ++i) out[i] = {re[i], im[i]};
  return out;
}

void adam_step(std::span<Parameter* const> params, const AdamConfig& cfg) {
  for (Parameter* p : params) {
    p->steps += 1;
    const double t = static_cast<double>(p->steps);
    const double c1 = 1.0 - std::pow(cfg.beta1, t);
    const double c2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t i = 0; i < p->size(); ++i) {
      const double g = p->grad[i];
      p->m[i] = cfg.beta1 * p->m[i] + (1.0 - cfg.beta1) * g;
      p->v[i] = cfg.beta2 * p->v[i] + (1.0 - cfg.beta2) * g * g;
      const double mhat = p->m[i] / c1;
      const double vhat = p->v[i] / c2;
      p->value[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

}  // namespace siclab::ad
