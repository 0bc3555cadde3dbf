#pragma once

// Behavioral models of the analog path between the digital transmit signal
// and the digital residual: PA, SI channel, noise/SOI mixing, LNA, AGC and
// the saturating mid-rise ADC.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "siclab/dsp.hpp"

namespace siclab::frontend {

/// Memoryless odd-order polynomial PA:
///   z = c * (a1 s + a3 |s|^2 s + a5 |s|^4 s)
/// where c is fixed so that a unit-variance complex Gaussian drive comes out
/// at `output_power`.
struct PaModel {
  cplx a1{1.0, 0.0};
  cplx a3{-0.016, -0.002};
  cplx a5{0.0, 0.001};
  DbmPower output_power{20.0};

  void validate() const;
  /// Output scale c from the closed-form Gaussian moments E|s|^(2n) = n!.
  double normalization() const;
};

ComplexSequence pa_apply(const PaModel& pa, std::span<const cplx> s);

struct SiChannel {
  ComplexSequence taps;
  double passive_isolation_db = 35.0;
};

struct SiChannelParams {
  std::size_t length = 32;
  double passive_isolation_db = 35.0;
  double decay = 0.15;  // per tap, on the amplitude envelope
};

/// Exponentially decaying complex-Gaussian taps. Without a reference the
/// taps are normalized to energy 10^(-isolation/10); with a reference transmit
/// signal they are normalized so that the convolved reference loses exactly
/// `passive_isolation_db`.
SiChannel make_si_channel(std::uint64_t seed, const SiChannelParams& params,
                          std::span<const cplx> reference = {});

struct AdcSpec {
  int bits = 12;
  double lambda = 1.0;

  void validate() const;
  /// Number of output levels, 2^B.
  double levels() const;
  /// Step size 2*lambda/(N-1).
  double delta() const;
};

/// Clipping to [-lambda, lambda].
double clip_g(double x, double lambda);

/// Mid-rise quantization of one real component:
///   delta * round((g(x) + lambda) / delta) - lambda
/// with round-half-away-from-zero.
double adc_quantize(const AdcSpec& spec, double x);
/// Applied separately to I and Q.
ComplexSequence adc_quantize(const AdcSpec& spec, std::span<const cplx> x);
void adc_quantize(const AdcSpec& spec, std::span<const double> in, std::span<double> out);

/// Fraction of I/Q components sitting at +-lambda.
double saturated_fraction(const AdcSpec& spec, std::span<const cplx> quantized);

struct LnaSpec {
  double gain_db = 30.0;

  double amplitude() const { return dsp::db_to_amplitude(gain_db); }
};

struct AgcSpec {
  std::size_t frame_len = 64;
  DbmPower setpoint{-12.0};
  double gain_min_db = -20.0;
  double gain_max_db = 40.0;
  /// Resolution of the RSSI ADC; 0 disables RSSI quantization.
  int rssi_bits = 12;

  void validate() const;
};

struct AgcTrace {
  std::vector<double> gains_db;  // applied analog gain per frame
  std::vector<double> rssi_db;   // gain as seen by the digital side per frame
  std::size_t frame_len = 0;

  std::size_t frame_of(std::size_t sample) const { return sample / frame_len; }
  /// Per-sample amplitude multipliers for the applied gains.
  std::vector<double> applied_amplitudes(std::size_t n) const;
  /// Per-sample amplitude multipliers for the reported (quantized) gains.
  std::vector<double> reported_amplitudes(std::size_t n) const;
};

/// Feedforward square-law AGC: each frame gets
///   clamp(setpoint - 10 log10(mean |x|^2 over the frame), gain_min, gain_max)
/// and the gain is reported through a dB-domain mid-rise RSSI ADC spanning
/// [gain_min, gain_max]. A short trailing frame uses the samples available.
AgcTrace agc_gains(const AgcSpec& spec, std::span<const cplx> x);

/// y_a = h * z + soi + noise. `noise_power` absent disables the noise.
ComplexSequence simulate_receive(std::span<const cplx> z, const SiChannel& h,
                                 std::span<const cplx> soi,
                                 std::optional<DbmPower> noise_power, std::uint64_t seed);

}  // namespace siclab::frontend
