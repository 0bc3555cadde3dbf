#include "siclab/strategies.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace siclab::train {
namespace {

constexpr std::uint64_t kStreamSignal = 1;
constexpr std::uint64_t kStreamChannel = 2;
constexpr std::uint64_t kStreamNoise = 3;

ad::CVar adc_block(ad::Tape& tape, ad::CVar a, const frontend::AdcSpec& adc) {
  return {tape.adc_noise(a.re, adc), tape.adc_noise(a.im, adc)};
}

// Clip whose pass-through region is judged on the digitized value.
ad::CVar observed_saturation(ad::Tape& tape, ad::CVar a, const frontend::AdcSpec& adc) {
  auto one = [&](ad::Var v) {
    const auto x = tape.value(v);
    std::vector<double> q(x.size());
    frontend::adc_quantize(adc, x, q);
    return tape.saturation(v, adc.lambda, q);
  };
  return {one(a.re), one(a.im)};
}

ad::CVar mul_const(ad::Tape& tape, ad::CVar a, const std::vector<double>& f) {
  return {tape.mul_const(a.re, f), tape.mul_const(a.im, f)};
}

double to_dbm(double linear) {
  if (linear <= 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(linear);
}

struct Accum {
  double analog = 0.0, digital = 0.0, saturated = 0.0, loss = 0.0;
  std::size_t count = 0;

  void add(const ad::Tape& tape, const GraphOutputs& g, const frontend::AdcSpec& adc) {
    analog += dsp::mean_power(tape.cvalue(g.residual_analog));
    digital += dsp::mean_power(tape.cvalue(g.residual_digital));
    saturated += frontend::saturated_fraction(adc, g.adc_output);
    loss += tape.scalar(g.loss);
    ++count;
  }

  TrainRow row(std::size_t epoch) const {
    const double n = static_cast<double>(count);
    return {epoch, to_dbm(analog / n), to_dbm(digital / n), saturated / n, loss / n};
  }
};

}  // namespace

StrategyKind parse_strategy(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "bpad") return StrategyKind::Bpad;
  if (s == "ste") return StrategyKind::Ste;
  if (s == "agc") return StrategyKind::Agc;
  if (s == "dta") return StrategyKind::Dta;
  throw InvalidArgument("unknown strategy '" + std::string(name) + "' (expected bpad, ste, agc or dta)");
}

std::string to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::Bpad: return "bpad";
    case StrategyKind::Ste: return "ste";
    case StrategyKind::Agc: return "agc";
    case StrategyKind::Dta: return "dta";
  }
  return "?";
}

bool uses_lna(StrategyKind kind) { return kind == StrategyKind::Bpad || kind == StrategyKind::Ste; }

ComplexSequence Frontend::analog(std::span<const cplx> s, std::span<const cplx> soi,
                                 std::uint64_t noise_seed) const {
  const auto z = frontend::pa_apply(pa, s);
  return frontend::simulate_receive(z, channel, soi, noise_power, noise_seed);
}

Corpus make_corpus(const CorpusConfig& cfg, std::uint64_t seed) {
  if (cfg.sequences == 0 || cfg.length == 0) throw InvalidArgument("make_corpus: empty corpus");
  cfg.frontend.pa.validate();
  Corpus corpus;
  corpus.frontend.pa = cfg.frontend.pa;
  corpus.frontend.noise_power = cfg.frontend.noise_power;
  corpus.sequences.resize(cfg.sequences);
  ComplexSequence reference;
  for (std::size_t i = 0; i < cfg.sequences; ++i) {
    auto& seq = corpus.sequences[i];
    seq.s = waveform::random_ofdm_signal(cfg.ofdm, cfg.length, dsp::derive_seed(seed, kStreamSignal, i));
    const auto z = frontend::pa_apply(cfg.frontend.pa, seq.s);
    reference.insert(reference.end(), z.begin(), z.end());
  }
  corpus.frontend.channel =
      frontend::make_si_channel(dsp::derive_seed(seed, kStreamChannel), cfg.frontend.channel, reference);
  for (std::size_t i = 0; i < cfg.sequences; ++i) {
    auto& seq = corpus.sequences[i];
    seq.y_a = corpus.frontend.analog(seq.s, {}, dsp::derive_seed(seed, kStreamNoise, i));
  }
  return corpus;
}

void dta_record_dataset(Corpus& corpus, const frontend::AdcSpec& adc) {
  adc.validate();
  for (auto& seq : corpus.sequences) seq.y_q = frontend::adc_quantize(adc, seq.y_a);
}

void TrainConfig::validate() const {
  if (epochs == 0) throw InvalidArgument("train: epochs must be >= 1");
  if (!(adam.lr > 0.0)) throw InvalidArgument("train: learning rate must be positive");
  if (!std::isfinite(lna_gain_db)) throw InvalidArgument("train: LNA gain must be finite");
  adc.validate();
  if (strategy == StrategyKind::Agc) agc.validate();
}

GraphOutputs build_residual_graph(const TrainConfig& cfg, model::HammersteinModel& m,
                                  const TrainingSequence& seq, ad::Tape& tape) {
  if (seq.s.size() != seq.y_a.size()) throw InvalidArgument("residual graph: s and y_a differ in length");
  const auto pred = m.forward(tape, seq.s);
  const auto r_a = tape.csub(tape.cconstant(seq.y_a), pred);
  const double alpha = dsp::db_to_amplitude(cfg.lna_gain_db);
  GraphOutputs g;
  g.residual_analog = r_a;
  switch (cfg.strategy) {
    case StrategyKind::Ste: {
      g.residual_digital = adc_block(tape, tape.cscale(r_a, alpha), cfg.adc);
      g.adc_output = tape.cvalue(g.residual_digital);
      break;
    }
    case StrategyKind::Bpad: {
      const auto amplified = tape.cscale(r_a, alpha);
      g.residual_digital = adc_block(tape, observed_saturation(tape, amplified, cfg.adc), cfg.adc);
      g.adc_output = tape.cvalue(g.residual_digital);
      break;
    }
    case StrategyKind::Agc: {
      const auto trace = frontend::agc_gains(cfg.agc, tape.cvalue(r_a));
      const auto n = seq.s.size();
      const auto amplified = mul_const(tape, r_a, trace.applied_amplitudes(n));
      const auto digitized = adc_block(tape, observed_saturation(tape, amplified, cfg.adc), cfg.adc);
      g.adc_output = tape.cvalue(digitized);
      const auto reported = trace.reported_amplitudes(n);
      g.residual_digital = {tape.div_const(digitized.re, reported), tape.div_const(digitized.im, reported)};
      break;
    }
    case StrategyKind::Dta: {
      if (seq.y_q.size() != seq.s.size())
        throw InvalidArgument("residual graph: DTA needs the ADC recording (dta_record_dataset)");
      g.residual_digital = tape.csub(tape.cconstant(seq.y_q), pred);
      // saturation as the deployed chain would see it
      auto ra = tape.cvalue(r_a);
      for (auto& v : ra) v *= alpha;
      g.adc_output = frontend::adc_quantize(cfg.adc, ra);
      break;
    }
  }
  g.loss = tape.mean_square(g.residual_digital);
  return g;
}

TrainRow evaluate(const TrainConfig& cfg, const model::HammersteinModel& m, const Corpus& corpus) {
  auto copy = m;
  Accum acc;
  for (const auto& seq : corpus.sequences) {
    ad::Tape tape;
    const auto g = build_residual_graph(cfg, copy, seq, tape);
    acc.add(tape, g, cfg.adc);
  }
  return acc.row(0);
}

TrainResult train(const TrainConfig& cfg, model::HammersteinModel m, const Corpus& corpus) {
  cfg.validate();
  if (corpus.sequences.empty()) throw InvalidArgument("train: empty corpus");
  TrainResult result;
  result.log.rows.reserve(cfg.epochs + 1);
  double best_loss = std::numeric_limits<double>::infinity();
  const auto params = m.parameters();
  const double weight = 1.0 / static_cast<double>(corpus.sequences.size());

  auto check = [&](const TrainRow& row) {
    if (!std::isfinite(row.loss)) {
      std::ostringstream msg;
      msg << "training diverged at epoch " << row.epoch << " (" << to_string(cfg.strategy)
          << ", loss " << row.loss << ")";
      throw DivergenceError(row.epoch, msg.str());
    }
    if (row.loss < best_loss) {
      best_loss = row.loss;
      result.best_model = m;
      result.best_epoch = row.epoch;
    }
  };

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Accum acc;
    if (cfg.batching == Batching::Corpus) {
      for (auto* p : params) p->zero_grad();
      for (const auto& seq : corpus.sequences) {
        ad::Tape tape;
        const auto g = build_residual_graph(cfg, m, seq, tape);
        acc.add(tape, g, cfg.adc);
        tape.backward(tape.scale(g.loss, weight));
      }
      auto row = acc.row(epoch);
      result.log.rows.push_back(row);
      check(row);
      ad::adam_step(params, cfg.adam);
    } else {
      for (const auto& seq : corpus.sequences) {
        for (auto* p : params) p->zero_grad();
        ad::Tape tape;
        const auto g = build_residual_graph(cfg, m, seq, tape);
        acc.add(tape, g, cfg.adc);
        if (!std::isfinite(tape.scalar(g.loss))) check(acc.row(epoch));
        tape.backward(g.loss);
        ad::adam_step(params, cfg.adam);
      }
      auto row = acc.row(epoch);
      result.log.rows.push_back(row);
      check(row);
    }
  }
  auto last = evaluate(cfg, m, corpus);
  last.epoch = cfg.epochs;
  result.log.rows.push_back(last);
  check(last);
  result.final_model = std::move(m);
  return result;
}

double final_residual_dbm(const TrainLog& log, std::size_t window) {
  if (log.rows.empty() || window == 0) throw InvalidArgument("final_residual_dbm: empty log");
  const std::size_t n = std::min(window, log.rows.size());
  std::vector<double> tail;
  for (std::size_t i = log.rows.size() - n; i < log.rows.size(); ++i) tail.push_back(log.rows[i].residual_dbm_analog);
  std::sort(tail.begin(), tail.end());
  return n % 2 ? tail[n / 2] : 0.5 * (tail[n / 2 - 1] + tail[n / 2]);
}

void write_train_csv(const std::string& path, const TrainLog& log) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  f << "epoch,residual_dbm_analog,residual_dbm_digital,saturated_fraction,loss\n";
  char buf[256];
  for (const auto& r : log.rows) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", r.epoch, r.residual_dbm_analog,
                  r.residual_dbm_digital, r.saturated_fraction, r.loss);
    f << buf;
  }
  if (!f) throw Error("write failed for " + path);
}

TrainLog read_train_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read " + path);
  std::string line;
  std::getline(f, line);
  if (line != "epoch,residual_dbm_analog,residual_dbm_digital,saturated_fraction,loss")
    throw Error("unexpected header in " + path);
  TrainLog log;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    TrainRow r;
    if (std::sscanf(line.c_str(), "%zu,%lf,%lf,%lf,%lf", &r.epoch, &r.residual_dbm_analog, &r.residual_dbm_digital,
                    &r.saturated_fraction, &r.loss) != 5)
      throw Error("malformed row in " + path + ": " + line);
    log.rows.push_back(r);
  }
  return log;
}

}  // namespace siclab::train
