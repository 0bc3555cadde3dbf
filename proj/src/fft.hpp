#pragma once

#include <fftw3.h>

#include <memory>
#include <span>

#include "siclab/dsp.hpp"

namespace siclab::detail {

/// Unnormalized complex DFT of a fixed size backed by FFTW. Plans are built
/// once per size and shared; executing them is thread-safe.
class Fft {
 public:
  /// Shared instance for size n.
  static const Fft& of_size(std::size_t n);

  explicit Fft(std::size_t n);

  std::size_t size() const { return n_; }
  /// out[k] = sum_n in[n] e^{-j2pi kn/N}
  void forward(std::span<const cplx> in, std::span<cplx> out) const;
  /// out[n] = sum_k in[k] e^{+j2pi kn/N}
  void inverse(std::span<const cplx> in, std::span<cplx> out) const;

 private:
  struct PlanDeleter {
    void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
  };
  using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

  std::size_t n_;
  Plan fwd_;
  Plan inv_;
};

}  // namespace siclab::detail
