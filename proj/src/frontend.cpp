#include "siclab/frontend.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace siclab::frontend {

void PaModel::validate() const {
  if (a1 == cplx{}) throw InvalidArgument("PaModel: a1 must be nonzero");
}

double PaModel::normalization() const {
  // E[t |a1 + a3 t + a5 t^2|^2] with t = |s|^2 ~ Exp(1), E[t^n] = n!
  const double p = std::norm(a1) + 2.0 * std::real(a1 * std::conj(a3)) * 2.0 +
                   (std::norm(a3) + 2.0 * std::real(a1 * std::conj(a5))) * 6.0 +
                   2.0 * std::real(a3 * std::conj(a5)) * 24.0 + std::norm(a5) * 120.0;
  if (!(p > 0.0)) throw InvalidArgument("PaModel: coefficients give non-positive output power");
  return std::sqrt(dsp::dbm_to_linear(output_power) / p);
}

ComplexSequence pa_apply(const PaModel& pa, std::span<const cplx> s) {
  pa.validate();
  const double c = pa.normalization();
  ComplexSequence z(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double t = std::norm(s[k]);
    z[k] = c * (pa.a1 + pa.a3 * t + pa.a5 * (t * t)) * s[k];
  }
  return z;
}

SiChannel make_si_channel(std::uint64_t seed, const SiChannelParams& params, std::span<const cplx> reference) {
  if (params.length == 0) throw InvalidArgument("make_si_channel: length must be >= 1");
  if (params.decay < 0.0) throw InvalidArgument("make_si_channel: negative decay");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  SiChannel ch;
  ch.passive_isolation_db = params.passive_isolation_db;
  ch.taps.resize(params.length);
  for (std::size_t m = 0; m < params.length; ++m) {
    const double envelope = std::exp(-params.decay * static_cast<double>(m));
    const double re = normal(rng);
    const double im = normal(rng);
    ch.taps[m] = envelope * cplx{re, im};
  }
  const double target_gain = std::pow(10.0, -params.passive_isolation_db / 10.0);
  double gain = 0.0;
  if (reference.empty()) {
    for (const auto& t : ch.taps) gain += std::norm(t);
  } else {
    gain = dsp::mean_power(dsp::fir_convolve(reference, ch.taps)) / dsp::mean_power(reference);
  }
  if (!(gain > 0.0)) throw Error("make_si_channel: degenerate channel draw");
  const double scale = std::sqrt(target_gain / gain);
  for (auto& t : ch.taps) t *= scale;
  return ch;
}

void AdcSpec::validate() const {
  if (bits < 1 || bits > 52) throw InvalidArgument("AdcSpec: bits must lie in [1, 52]");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("AdcSpec: lambda must be positive");
}

double AdcSpec::levels() const { return std::ldexp(1.0, bits); }

double AdcSpec::delta() const { return 2.0 * lambda / (levels() - 1.0); }

double clip_g(double x, double lambda) {
  if (x <= -lambda) return -lambda;
  if (x >= lambda) return lambda;
  return x;
}

double adc_quantize(const AdcSpec& spec, double x) {
  const double steps = spec.levels() - 1.0;
  // (g + lambda) / delta, written so that exact midpoints stay exact
  const double index = std::round((clip_g(x, spec.lambda) + spec.lambda) * steps / (2.0 * spec.lambda));
  return std::clamp(index * spec.delta() - spec.lambda, -spec.lambda, spec.lambda);
}

void adc_quantize(const AdcSpec& spec, std::span<const double> in, std::span<double> out) {
  if (in.size() != out.size()) throw InvalidArgument("adc_quantize: size mismatch");
  spec.validate();
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = adc_quantize(spec, in[i]);
}

ComplexSequence adc_quantize(const AdcSpec& spec, std::span<const cplx> x) {
  spec.validate();
  ComplexSequence out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k)
    out[k] = {adc_quantize(spec, x[k].real()), adc_quantize(spec, x[k].imag())};
  return out;
}

double saturated_fraction(const AdcSpec& spec, std::span<const cplx> quantized) {
  if (quantized.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& v : quantized) {
    hits += std::abs(v.real()) >= spec.lambda;
    hits += std::abs(v.imag()) >= spec.lambda;
  }
  return static_cast<double>(hits) / (2.0 * static_cast<double>(quantized.size()));
}

void AgcSpec::validate() const {
  if (frame_len < 1) throw InvalidArgument("AgcSpec: frame_len must be >= 1");
  if (!(gain_min_db <= gain_max_db)) throw InvalidArgument("AgcSpec: gain_min must be <= gain_max");
  if (rssi_bits < 0 || rssi_bits > 52) throw InvalidArgument("AgcSpec: rssi_bits must lie in [0, 52]");
}

std::vector<double> AgcTrace::applied_amplitudes(std::size_t n) const {
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = dsp::db_to_amplitude(gains_db[frame_of(k)]);
  return out;
}

std::vector<double> AgcTrace::reported_amplitudes(std::size_t n) const {
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = dsp::db_to_amplitude(rssi_db[frame_of(k)]);
  return out;
}

AgcTrace agc_gains(const AgcSpec& spec, std::span<const cplx> x) {
  spec.validate();
  if (x.size() < spec.frame_len) throw InvalidArgument("agc_gains: input shorter than one AGC frame");
  AgcTrace trace;
  trace.frame_len = spec.frame_len;
  const double center = 0.5 * (spec.gain_max_db + spec.gain_min_db);
  const double half = 0.5 * (spec.gain_max_db - spec.gain_min_db);
  const AdcSpec rssi_adc{spec.rssi_bits, 1.0};
  for (std::size_t start = 0; start < x.size(); start += spec.frame_len) {
    const auto frame = x.subspan(start, std::min(spec.frame_len, x.size() - start));
    const double p = dsp::mean_power(frame);
    const double wanted = p > 0.0 ? spec.setpoint.value - 10.0 * std::log10(p) : spec.gain_max_db;
    const double gain = std::clamp(wanted, spec.gain_min_db, spec.gain_max_db);
    trace.gains_db.push_back(gain);
    if (spec.rssi_bits == 0 || half == 0.0) {
      trace.rssi_db.push_back(gain);
    } else {
      trace.rssi_db.push_back(center + half * adc_quantize(rssi_adc, (gain - center) / half));
    }
  }
  return trace;
}

ComplexSequence simulate_receive(std::span<const cplx> z, const SiChannel& h, std::span<const cplx> soi,
                                 std::optional<DbmPower> noise_power, std::uint64_t seed) {
  if (!soi.empty() && soi.size() != z.size()) throw InvalidArgument("simulate_receive: soi length mismatch");
  if (z.empty()) throw InvalidArgument("simulate_receive: empty transmit signal");
  auto y = dsp::fir_convolve(z, h.taps);
  for (std::size_t k = 0; k < soi.size(); ++k) y[k] += soi[k];
  if (noise_power) {
    const auto n = dsp::awgn_complex(y.size(), *noise_power, seed);
    for (std::size_t k = 0; k < y.size(); ++k) y[k] += n[k];
  }
  return y;
}

}  // namespace siclab::frontend
