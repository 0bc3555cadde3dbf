#include "fft.hpp"

#include <map>
#include <mutex>
#include <vector>

namespace siclab::detail {
namespace {
// FFTW's planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }
fftw_complex* as_fftw(const cplx* p) { return reinterpret_cast<fftw_complex*>(const_cast<cplx*>(p)); }
}  // namespace

Fft::Fft(std::size_t n) : n_(n) {
  if (n == 0) throw InvalidArgument("Fft: zero size");
  std::vector<cplx> a(n), b(n);
  std::lock_guard lock(planner_mutex());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  const int len = static_cast<int>(n);
  fwd_.reset(fftw_plan_dft_1d(len, as_fftw(a.data()), as_fftw(b.data()), FFTW_FORWARD, flags));
  inv_.reset(fftw_plan_dft_1d(len, as_fftw(a.data()), as_fftw(b.data()), FFTW_BACKWARD, flags));
  if (!fwd_ || !inv_) throw Error("Fft: FFTW planning failed");
}

const Fft& Fft::of_size(std::size_t n) {
  static std::mutex cache_mutex;
  static std::map<std::size_t, std::unique_ptr<Fft>> cache;
  std::lock_guard lock(cache_mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Fft>(n);
  return *slot;
}

void Fft::forward(std::span<const cplx> in, std::span<cplx> out) const {
  if (in.size() != n_ || out.size() != n_) throw InvalidArgument("Fft: size mismatch");
  fftw_execute_dft(fwd_.get(), as_fftw(in.data()), as_fftw(out.data()));
}

void Fft::inverse(std::span<const cplx> in, std::span<cplx> out) const {
  if (in.size() != n_ || out.size() != n_) throw InvalidArgument("Fft: size mismatch");
  fftw_execute_dft(inv_.get(), as_fftw(in.data()), as_fftw(out.data()));
}

}  // namespace siclab::detail
