#pragma once

// Complex baseband containers and the handful of signal primitives every
// other module builds on. Power is expressed in dBm with the convention that
// a complex sequence of unit variance sits at 0 dBm.

#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace siclab {

using cplx = std::complex<double>;
using ComplexSequence = std::vector<cplx>;

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an input violates a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Raised by power_dbm / scale_to_dbm when the signal carries no energy.
class SilentSignal : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Power level in dBm.
struct DbmPower {
  double value = 0.0;

  constexpr auto operator<=>(const DbmPower&) const = default;
};

namespace dsp {

/// Power gain in dB to amplitude multiplier, 10^(g/20).
double db_to_amplitude(double gain_db);
/// dBm level to linear power, 10^(p/10).
double dbm_to_linear(DbmPower p);
DbmPower linear_to_dbm(double linear_power);

/// Mean |x[k]|^2, without the log.
double mean_power(std::span<const cplx> x);

/// 10*log10(mean |x|^2). Throws InvalidArgument on empty input and
/// SilentSignal on an all-zero input.
DbmPower power_dbm(std::span<const cplx> x);

/// Rescales x so that power_dbm(result) == target.
ComplexSequence scale_to_dbm(std::span<const cplx> x, DbmPower target);

/// Causal linear convolution truncated to x.size():
///   y[k] = sum_m h[m] x[k-m],  x[k<0] = 0
ComplexSequence fir_convolve(std::span<const cplx> x, std::span<const cplx> h);

/// Circularly-symmetric complex Gaussian noise with per-sample variance
/// 10^(power/10), split equally between I and Q.
ComplexSequence awgn_complex(std::size_t n, DbmPower power, std::uint64_t seed);

/// Mixes a run seed with a stream label so that independent random streams
/// (corpus, noise, channel, weights, ...) never share state.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0);

bool all_finite(std::span<const cplx> x);

}  // namespace dsp
}  // namespace siclab
