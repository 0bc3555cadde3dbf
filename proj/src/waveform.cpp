#include "siclab/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fft.hpp"

namespace siclab::waveform {
namespace {

constexpr double kQamNorm = 3.1622776601683795;  // sqrt(10)
constexpr std::uint64_t kPreambleSeed = 0x0FD3'5EED'2024ULL;

// Gray pair (b0 b1) -> PAM level.
double gray_level(std::uint8_t b0, std::uint8_t b1) {
  static constexpr double levels[2][2] = {{-3.0, -1.0}, {3.0, 1.0}};
  return levels[b0][b1];
}

// Decision with ties resolved toward the lower level.
void pam4_decide(double v, std::uint8_t& b0, std::uint8_t& b1) {
  if (v <= -2.0) {
    b0 = 0, b1 = 0;
  } else if (v <= 0.0) {
    b0 = 0, b1 = 1;
  } else if (v <= 2.0) {
    b0 = 1, b1 = 1;
  } else {
    b0 = 1, b1 = 0;
  }
}

std::size_t bin_of(int subcarrier, std::size_t nfft) {
  const auto n = static_cast<long>(nfft);
  return static_cast<std::size_t>(((subcarrier % n) + n) % n);
}

// Frequency-domain symbol -> time-domain symbol with CP, unit average power
// on the occupied carriers.
void synthesize_symbol(const OfdmConfig& cfg, std::span<const cplx> bins, ComplexSequence& out) {
  const auto& fft = detail::Fft::of_size(cfg.nfft);
  std::vector<cplx> time(cfg.nfft);
  fft.inverse(bins, time);
  const double norm = 1.0 / std::sqrt(static_cast<double>(cfg.used_subcarriers));
  for (auto& v : time) v *= norm;
  out.insert(out.end(), time.end() - static_cast<long>(cfg.cp_len), time.end());
  out.insert(out.end(), time.begin(), time.end());
}

std::vector<cplx> analyze_symbol(const OfdmConfig& cfg, std::span<const cplx> symbol_with_cp) {
  const auto& fft = detail::Fft::of_size(cfg.nfft);
  std::vector<cplx> bins(cfg.nfft);
  fft.forward(symbol_with_cp.subspan(cfg.cp_len, cfg.nfft), bins);
  const double norm = std::sqrt(static_cast<double>(cfg.used_subcarriers)) / static_cast<double>(cfg.nfft);
  for (auto& v : bins) v *= norm;
  return bins;
}

}  // namespace

void OfdmConfig::validate() const {
  if (nfft < 4) throw InvalidArgument("ofdm: nfft too small");
  if (cp_len >= nfft) throw InvalidArgument("ofdm: cp_len must be < nfft");
  if (used_subcarriers == 0 || used_subcarriers % 2 != 0)
    throw InvalidArgument("ofdm: used_subcarriers must be even and positive");
  if (used_subcarriers + 1 > nfft) throw InvalidArgument("ofdm: used_subcarriers plus DC exceed nfft");
  if (pilot_indices.size() >= used_subcarriers) throw InvalidArgument("ofdm: no data subcarriers left");
  if (preamble_symbols == 0) throw InvalidArgument("ofdm: at least one preamble symbol required");
  const int half = static_cast<int>(used_subcarriers / 2);
  for (int p : pilot_indices)
    if (p == 0 || std::abs(p) > half) throw InvalidArgument("ofdm: pilot outside occupied band");
  if (!(detect_threshold > 0.0 && detect_threshold < 1.0))
    throw InvalidArgument("ofdm: detect_threshold must lie in (0, 1)");
}

std::vector<int> OfdmConfig::occupied() const {
  const int half = static_cast<int>(used_subcarriers / 2);
  std::vector<int> out;
  out.reserve(used_subcarriers);
  for (int k = -half; k <= half; ++k)
    if (k != 0) out.push_back(k);
  return out;
}

std::vector<int> OfdmConfig::data_subcarriers() const {
  std::vector<int> out;
  for (int k : occupied())
    if (std::find(pilot_indices.begin(), pilot_indices.end(), k) == pilot_indices.end()) out.push_back(k);
  return out;
}

BitBuffer random_bits(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  BitBuffer b;
  b.bits.resize(n);
  for (auto& bit : b.bits) bit = static_cast<std::uint8_t>(rng() >> 63);
  return b;
}

BitBuffer pad_to_multiple(BitBuffer b, std::size_t multiple) {
  if (multiple == 0) throw InvalidArgument("pad_to_multiple: zero multiple");
  const std::size_t rem = b.bits.size() % multiple;
  if (rem != 0 || b.bits.empty()) {
    const std::size_t extra = b.bits.empty() ? multiple : multiple - rem;
    b.bits.insert(b.bits.end(), extra, 0);
    b.pad_bits += extra;
  }
  return b;
}

ComplexSequence qam16_map(const BitBuffer& bits) {
  if (bits.bits.size() % 4 != 0) throw InvalidArgument("qam16_map: bit count not divisible by 4");
  ComplexSequence out(bits.bits.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto* b = &bits.bits[4 * i];
    out[i] = cplx{gray_level(b[0], b[1]), gray_level(b[2], b[3])} / kQamNorm;
  }
  return out;
}

BitBuffer qam16_demap(std::span<const cplx> symbols) {
  BitBuffer out;
  out.bits.resize(4 * symbols.size());
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    auto* b = &out.bits[4 * i];
    pam4_decide(symbols[i].real() * kQamNorm, b[0], b[1]);
    pam4_decide(symbols[i].imag() * kQamNorm, b[2], b[3]);
  }
  return out;
}

double ber_count(const BitBuffer& tx, const BitBuffer& rx) {
  if (tx.bits.size() != rx.bits.size()) throw InvalidArgument("ber_count: length mismatch");
  const std::size_t n = tx.payload_size();
  if (n == 0) throw InvalidArgument("ber_count: no payload bits");
  std::size_t errors = 0;
  for (std::size_t i = 0; i < n; ++i) errors += tx.bits[i] != rx.bits[i];
  return static_cast<double>(errors) / static_cast<double>(n);
}

std::vector<cplx> preamble_pattern(const OfdmConfig& cfg) {
  std::mt19937_64 rng(kPreambleSeed);
  const double a = 1.0 / std::sqrt(2.0);
  std::vector<cplx> pattern(cfg.used_subcarriers);
  for (auto& v : pattern) {
    const double re = (rng() >> 63) ? a : -a;
    const double im = (rng() >> 63) ? a : -a;
    v = {re, im};
  }
  return pattern;
}

ComplexSequence ofdm_preamble(const OfdmConfig& cfg) {
  cfg.validate();
  const auto carriers = cfg.occupied();
  const auto pattern = preamble_pattern(cfg);
  std::vector<cplx> bins(cfg.nfft, cplx{});
  for (std::size_t i = 0; i < carriers.size(); ++i) bins[bin_of(carriers[i], cfg.nfft)] = pattern[i];
  ComplexSequence out;
  out.reserve(cfg.preamble_symbols * cfg.symbol_len());
  for (std::size_t s = 0; s < cfg.preamble_symbols; ++s) synthesize_symbol(cfg, bins, out);
  return out;
}

OfdmFrame ofdm_modulate(const OfdmConfig& cfg, const BitBuffer& payload) {
  cfg.validate();
  const auto data = cfg.data_subcarriers();
  OfdmFrame frame;
  frame.bits = pad_to_multiple(payload, 4 * data.size());
  const auto symbols = qam16_map(frame.bits);
  frame.data_symbols = symbols.size() / data.size();

  frame.samples = ofdm_preamble(cfg);
  frame.samples.reserve((cfg.preamble_symbols + frame.data_symbols) * cfg.symbol_len());
  std::vector<cplx> bins(cfg.nfft);
  for (std::size_t s = 0; s < frame.data_symbols; ++s) {
    std::fill(bins.begin(), bins.end(), cplx{});
    for (std::size_t i = 0; i < data.size(); ++i) bins[bin_of(data[i], cfg.nfft)] = symbols[s * data.size() + i];
    for (int p : cfg.pilot_indices) bins[bin_of(p, cfg.nfft)] = cplx{1.0, 0.0};
    synthesize_symbol(cfg, bins, frame.samples);
  }
  return frame;
}

std::vector<double> preamble_correlation(const OfdmConfig& cfg, std::span<const cplx> rx) {
  const auto pre = ofdm_preamble(cfg);
  const std::size_t len = pre.size();
  if (rx.size() < len) return {};
  double pre_energy = 0.0;
  for (const auto& v : pre) pre_energy += std::norm(v);

  std::vector<double> out(rx.size() - len + 1);
  // sliding window energy of rx
  double win = 0.0;
  for (std::size_t i = 0; i < len; ++i) win += std::norm(rx[i]);
  for (std::size_t d = 0; d < out.size(); ++d) {
    if (d > 0) win += std::norm(rx[d + len - 1]) - std::norm(rx[d - 1]);
    cplx acc{};
    for (std::size_t i = 0; i < len; ++i) acc += rx[d + i] * std::conj(pre[i]);
    const double denom = std::sqrt(std::max(win, 0.0) * pre_energy);
    out[d] = denom > 0.0 ? std::abs(acc) / denom : 0.0;
  }
  return out;
}

ReceiveResult ofdm_receive(const OfdmConfig& cfg, std::span<const cplx> rx, const BitBuffer& tx_bits) {
  cfg.validate();
  const auto data = cfg.data_subcarriers();
  const auto carriers = cfg.occupied();
  const std::size_t bits_per_symbol = 4 * data.size();
  if (tx_bits.bits.size() % bits_per_symbol != 0)
    throw InvalidArgument("ofdm_receive: tx_bits must cover whole OFDM symbols");
  const std::size_t data_symbols = tx_bits.bits.size() / bits_per_symbol;
  const std::size_t frame_len = (cfg.preamble_symbols + data_symbols) * cfg.symbol_len();
  if (rx.size() < frame_len) throw InvalidArgument("ofdm_receive: rx shorter than one frame");

  ReceiveResult result;
  const auto corr = preamble_correlation(cfg, rx.first(rx.size() - frame_len + cfg.preamble_symbols * cfg.symbol_len()));
  const auto peak = std::max_element(corr.begin(), corr.end());
  result.peak_correlation = *peak;
  if (*peak < cfg.detect_threshold) return result;  // BER 0.5 by convention
  result.detected = true;
  result.frame_start = static_cast<std::size_t>(peak - corr.begin());
  const auto frame = rx.subspan(result.frame_start, frame_len);

  // LS channel estimate averaged over the training symbols.
  const auto pattern = preamble_pattern(cfg);
  std::vector<std::vector<cplx>> per_symbol;
  for (std::size_t s = 0; s < cfg.preamble_symbols; ++s)
    per_symbol.push_back(analyze_symbol(cfg, frame.subspan(s * cfg.symbol_len(), cfg.symbol_len())));
  std::vector<cplx> channel(cfg.nfft, cplx{});
  double signal = 0.0, noise = 0.0;
  for (std::size_t i = 0; i < carriers.size(); ++i) {
    const std::size_t bin = bin_of(carriers[i], cfg.nfft);
    cplx sum{};
    for (const auto& sym : per_symbol) sum += sym[bin] / pattern[i];
    channel[bin] = sum / static_cast<double>(per_symbol.size());
    signal += std::norm(channel[bin]);
    for (const auto& sym : per_symbol) noise += std::norm(sym[bin] / pattern[i] - channel[bin]);
  }
  if (cfg.preamble_symbols > 1) {
    noise /= static_cast<double>(cfg.preamble_symbols - 1);
    result.sinr_est_db = noise > 0.0 ? 10.0 * std::log10(signal / noise) : 300.0;
  }

  ComplexSequence equalized;
  equalized.reserve(data_symbols * data.size());
  for (std::size_t s = 0; s < data_symbols; ++s) {
    const auto bins =
        analyze_symbol(cfg, frame.subspan((cfg.preamble_symbols + s) * cfg.symbol_len(), cfg.symbol_len()));
    for (int k : data) {
      const std::size_t bin = bin_of(k, cfg.nfft);
      const cplx h = channel[bin];
      equalized.push_back(std::norm(h) > 0.0 ? bins[bin] / h : cplx{});
    }
  }
  auto rx_bits = qam16_demap(equalized);
  rx_bits.pad_bits = tx_bits.pad_bits;
  result.ber = ber_count(tx_bits, rx_bits);
  return result;
}

ComplexSequence random_ofdm_signal(const OfdmConfig& cfg, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("random_ofdm_signal: zero length");
  const std::size_t symbols = (n + cfg.symbol_len() - 1) / cfg.symbol_len();
  const auto frame = ofdm_modulate(cfg, random_bits(symbols * cfg.bits_per_symbol(), seed));
  // skip the preamble: a steady data stream
  const auto start = frame.samples.begin() + static_cast<long>(cfg.preamble_symbols * cfg.symbol_len());
  ComplexSequence out(start, start + static_cast<long>(n));
  return dsp::scale_to_dbm(out, DbmPower{0.0});
}

}  // namespace siclab::waveform
