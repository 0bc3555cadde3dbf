#pragma once

// Independent reference computations for the tests.

#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

#include "siclab/autodiff.hpp"
#include "siclab/dsp.hpp"

namespace oracle {

using siclab::cplx;

/// Central finite difference of f at x along coordinate i.
inline double central_difference(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
                                 std::size_t i, double h) {
  const double x0 = x[i];
  x[i] = x0 + h;
  const double fp = f(x);
  x[i] = x0 - h;
  const double fm = f(x);
  return (fp - fm) / (2.0 * h);
}

/// max over coordinates of |a-b| / max(|a|, |b|, floor)
inline double relative_error(double a, double b, double floor = 1e-8) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Direct O(nL) convolution with complex arithmetic.
inline std::vector<cplx> direct_convolution(const std::vector<cplx>& x, const std::vector<cplx>& h) {
  std::vector<cplx> y(x.size());
  for (std::size_t k = 0; k < x.size(); ++k)
    for (std::size_t m = 0; m < h.size() && m <= k; ++m) y[k] += h[m] * x[k - m];
  return y;
}

inline std::vector<double> uniform(std::size_t n, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& e : v) e = u(rng);
  return v;
}

inline std::vector<cplx> complex_gaussian(std::size_t n, double power, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, std::sqrt(power / 2.0));
  std::vector<cplx> v(n);
  for (auto& e : v) e = {g(rng), g(rng)};
  return v;
}

inline double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

/// Gray 16-QAM bit error probability on AWGN with unit symbol energy and
/// complex noise power n0.
inline double qam16_ber(double n0) {
  const double sigma = std::sqrt(n0 / 2.0);      // per axis
  const double d = 1.0 / std::sqrt(10.0);        // half spacing
  const double a = d / sigma;
  return (3.0 * q_function(a) + 2.0 * q_function(3.0 * a) - q_function(5.0 * a)) / 4.0;
}

/// Reference mid-rise quantizer written straight from the definition.
inline double quantize(double x, int bits, double lambda) {
  const double n = std::ldexp(1.0, bits);
  const double delta = 2.0 * lambda / (n - 1.0);
  const double g = std::min(std::max(x, -lambda), lambda);
  const double t = (g + lambda) / delta;
  const double r = t >= 0 ? std::floor(t + 0.5) : -std::floor(-t + 0.5);
  return std::min(std::max(delta * r - lambda, -lambda), lambda);
}

}  // namespace oracle
