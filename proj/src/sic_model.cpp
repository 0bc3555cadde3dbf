#include "siclab/sic_model.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

namespace siclab::model {
namespace {

void glorot(ad::Parameter& p, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(p.rows + p.cols));
  std::uniform_real_distribution<double> u(-limit, limit);
  for (auto& v : p.value) v = u(rng);
}

std::vector<double> features(std::span<const cplx> s) {
  std::vector<double> x(3 * s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    x[3 * k] = s[k].real();
    x[3 * k + 1] = s[k].imag();
    x[3 * k + 2] = std::abs(s[k]);
  }
  return x;
}

template <class Bind>
ad::CVar build(ad::Tape& tape, std::span<const cplx> s, double output_scale, Bind bind,
               const HammersteinModel& m) {
  const std::size_t n = s.size();
  const auto x = tape.constant(features(s), n, 3);
  const auto hidden = tape.tanh(tape.affine(x, bind(m.w1), bind(m.b1)));
  const auto gain = tape.affine(hidden, bind(m.w2), bind(m.b2));
  const ad::CVar c{tape.column(gain, 0), tape.column(gain, 1)};
  const auto sig = tape.cconstant(s);
  // u = s + s * c
  const ad::CVar u = tape.cadd(sig, tape.cmul(sig, c));
  const ad::CVar taps{bind(m.fir_re), bind(m.fir_im)};
  return tape.cscale(tape.cconv(u, taps), output_scale);
}

}  // namespace

HammersteinModel HammersteinModel::init(std::uint64_t seed, const ModelShape& shape) {
  if (shape.hidden == 0) throw InvalidArgument("model_init: hidden width must be >= 1");
  if (shape.fir_len == 0) throw InvalidArgument("model_init: FIR length must be >= 1");
  HammersteinModel m;
  m.shape_ = shape;
  m.output_scale_ = dsp::db_to_amplitude(shape.output_level.value);
  m.w1 = ad::Parameter("mlp.w1", 3, shape.hidden);
  m.b1 = ad::Parameter("mlp.b1", 1, shape.hidden);
  m.w2 = ad::Parameter("mlp.w2", shape.hidden, 2);
  m.b2 = ad::Parameter("mlp.b2", 1, 2);
  m.fir_re = ad::Parameter("fir.re", shape.fir_len, 1);
  m.fir_im = ad::Parameter("fir.im", shape.fir_len, 1);
  std::mt19937_64 rng(seed);
  glorot(m.w1, rng);
  glorot(m.w2, rng);
  return m;
}

ad::CVar HammersteinModel::forward(ad::Tape& tape, std::span<const cplx> s) {
  return build(tape, s, output_scale_, [&tape](const ad::Parameter& p) {
    return tape.param(const_cast<ad::Parameter&>(p));
  }, *this);
}

ComplexSequence HammersteinModel::predict(std::span<const cplx> s) const {
  ad::Tape tape;
  const auto out = build(tape, s, output_scale_, [&tape](const ad::Parameter& p) {
    return tape.constant(p.value, p.rows, p.cols);
  }, *this);
  return tape.cvalue(out);
}

std::vector<ad::Parameter*> HammersteinModel::parameters() { return {&w1, &b1, &w2, &b2, &fir_re, &fir_im}; }

std::vector<const ad::Parameter*> HammersteinModel::parameters() const {
  return {&w1, &b1, &w2, &b2, &fir_re, &fir_im};
}

std::size_t HammersteinModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) n += p->size();
  return n;
}

std::string to_checkpoint_text(const HammersteinModel& m, const std::map<std::string, std::string>& provenance) {
  std::ostringstream out;
  out << "siclab-checkpoint 1\n";
  out << std::hexfloat;
  out << "hidden " << m.shape().hidden << "\n";
  out << "fir_len " << m.shape().fir_len << "\n";
  out << "output_level_dbm " << m.shape().output_level.value << "\n";
  out << "output_scale " << m.output_scale() << "\n";
  for (const auto& [k, v] : provenance) {
    if (k.find_first_of(" \n") != std::string::npos || v.find('\n') != std::string::npos)
      throw InvalidArgument("checkpoint: provenance entries must be single-line, key without spaces");
    out << "config " << k << " " << v << "\n";
  }
  for (const auto* p : m.parameters()) {
    out << "param " << p->name << " " << std::dec << p->rows << " " << p->cols << std::hexfloat;
    for (double v : p->value) out << " " << v;
    out << "\n";
  }
  out << "end\n";
  return out.str();
}

HammersteinModel from_checkpoint_text(const std::string& text, std::map<std::string, std::string>* provenance) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "siclab-checkpoint 1") throw Error("checkpoint: bad header");
  auto parse_double = [](const std::string& tok) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') throw Error("checkpoint: bad number '" + tok + "'");
    return v;
  };
  ModelShape shape;
  double output_scale = 0.0;
  std::map<std::string, std::vector<double>> params;
  std::map<std::string, std::pair<std::size_t, std::size_t>> shapes;
  bool ended = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "hidden") {
      ls >> shape.hidden;
    } else if (tag == "fir_len") {
      ls >> shape.fir_len;
    } else if (tag == "output_level_dbm") {
      std::string tok;
      ls >> tok;
      shape.output_level.value = parse_double(tok);
    } else if (tag == "output_scale") {
      std::string tok;
      ls >> tok;
      output_scale = parse_double(tok);
    } else if (tag == "config") {
      std::string key;
      ls >> key;
      std::string rest;
      std::getline(ls, rest);
      if (!rest.empty() && rest.front() == ' ') rest.erase(0, 1);
      if (provenance) (*provenance)[key] = rest;
    } else if (tag == "param") {
      std::string name;
      std::size_t rows = 0, cols = 0;
      ls >> name >> rows >> cols;
      std::vector<double> values;
      std::string tok;
      while (ls >> tok) values.push_back(parse_double(tok));
      if (values.size() != rows * cols) throw Error("checkpoint: size mismatch for " + name);
      shapes[name] = {rows, cols};
      params[name] = std::move(values);
    } else if (tag == "end") {
      ended = true;
      break;
    } else if (!tag.empty()) {
      throw Error("checkpoint: unknown record '" + tag + "'");
    }
  }
  if (!ended) throw Error("checkpoint: truncated file");
  auto m = HammersteinModel::init(0, shape);
  for (auto* p : m.parameters()) {
    const auto it = params.find(p->name);
    if (it == params.end()) throw Error("checkpoint: missing parameter " + p->name);
    if (shapes[p->name] != std::pair{p->rows, p->cols}) throw Error("checkpoint: shape mismatch for " + p->name);
    p->value = it->second;
  }
  if (output_scale != m.output_scale()) throw Error("checkpoint: output scale inconsistent with level");
  return m;
}

void save_checkpoint(const std::string& path, const HammersteinModel& m,
                     const std::map<std::string, std::string>& provenance) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("checkpoint: cannot write " + path);
  f << to_checkpoint_text(m, provenance);
  if (!f) throw Error("checkpoint: write failed for " + path);
}

HammersteinModel load_checkpoint(const std::string& path, std::map<std::string, std::string>* provenance) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("checkpoint: cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return from_checkpoint_text(ss.str(), provenance);
}

}  // namespace siclab::model
