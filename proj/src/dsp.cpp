#include "siclab/dsp.hpp"

#include <cmath>
#include <random>

namespace siclab::dsp {

double db_to_amplitude(double gain_db) { return std::pow(10.0, gain_db / 20.0); }

double dbm_to_linear(DbmPower p) { return std::pow(10.0, p.value / 10.0); }

DbmPower linear_to_dbm(double linear_power) { return {10.0 * std::log10(linear_power)}; }

double mean_power(std::span<const cplx> x) {
  if (x.empty()) throw InvalidArgument("mean_power: empty sequence");
  double acc = 0.0;
  for (const auto& v : x) acc += std::norm(v);
  return acc / static_cast<double>(x.size());
}

DbmPower power_dbm(std::span<const cplx> x) {
  if (x.empty()) throw InvalidArgument("power_dbm: empty sequence");
  const double p = mean_power(x);
  if (p == 0.0) throw SilentSignal("power_dbm: silent signal (all-zero input)");
  return linear_to_dbm(p);
}

ComplexSequence scale_to_dbm(std::span<const cplx> x, DbmPower target) {
  const double p = mean_power(x);
  if (p == 0.0) throw SilentSignal("scale_to_dbm: silent signal (all-zero input)");
  const double gain = std::sqrt(dbm_to_linear(target) / p);
  ComplexSequence out(x.begin(), x.end());
  for (auto& v : out) v *= gain;
  return out;
}

ComplexSequence fir_convolve(std::span<const cplx> x, std::span<const cplx> h) {
  if (h.empty()) throw InvalidArgument("fir_convolve: empty impulse response");
  const std::size_t n = x.size();
  ComplexSequence y(n, cplx{0.0, 0.0});
  for (std::size_t m = 0; m < h.size() && m < n; ++m) {
    const cplx tap = h[m];
    for (std::size_t k = m; k < n; ++k) y[k] += tap * x[k - m];
  }
  return y;
}

ComplexSequence awgn_complex(std::size_t n, DbmPower power, std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("awgn_complex: zero length");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(dbm_to_linear(power) / 2.0));
  ComplexSequence out(n);
  for (auto& v : out) {
    const double re = normal(rng);
    const double im = normal(rng);
    v = {re, im};
  }
  return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  // splitmix64 finalizer over the combined words
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(seed) ^ stream) ^ index);
}

bool all_finite(std::span<const cplx> x) {
  for (const auto& v : x)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

}  // namespace siclab::dsp
