#pragma once

// Simplified OFDM / 16-QAM waveform: uncoded Gray-mapped 16-QAM on the
// data subcarriers of a 64-point OFDM symbol, a repeated full-band QPSK
// training preamble, correlation-based packet detection and a one-tap
// least-squares equalizer.

#include <cstdint>
#include <span>
#include <vector>

#include "siclab/dsp.hpp"

namespace siclab::waveform {

struct OfdmConfig {
  std::size_t nfft = 64;
  /// Occupied subcarriers, symmetric around DC (DC itself unused). Pilots are
  /// taken out of this set; the remainder carries data.
  std::size_t used_subcarriers = 52;
  std::size_t cp_len = 16;
  std::vector<int> pilot_indices = {-21, -7, 7, 21};
  std::size_t preamble_symbols = 2;
  /// Normalized preamble correlation needed to declare a packet.
  double detect_threshold = 0.5;

  /// Throws InvalidArgument when the layout is inconsistent.
  void validate() const;

  std::size_t symbol_len() const { return nfft + cp_len; }
  /// Signed subcarrier indices in ascending order: -used/2 .. used/2, no DC.
  std::vector<int> occupied() const;
  std::vector<int> data_subcarriers() const;
  std::size_t bits_per_symbol() const { return 4 * data_subcarriers().size(); }
};

struct BitBuffer {
  std::vector<std::uint8_t> bits;
  /// Trailing zeros appended for framing; excluded from BER counting.
  std::size_t pad_bits = 0;

  std::size_t payload_size() const { return bits.size() - pad_bits; }
};

BitBuffer random_bits(std::size_t n, std::uint64_t seed);

/// Appends zeros until the length is a multiple of `multiple`, recording them
/// as padding.
BitBuffer pad_to_multiple(BitBuffer b, std::size_t multiple);

/// Gray-coded 16-QAM with levels {-3,-1,+1,+3}/sqrt(10) per axis. Bits
/// (b0 b1 | b2 b3) drive (I | Q) with 00->-3, 01->-1, 11->+1, 10->+3.
ComplexSequence qam16_map(const BitBuffer& bits);

/// Hard decision to the nearest constellation point. Exact ties resolve
/// toward the lower level on each axis, which is the lower Gray index.
BitBuffer qam16_demap(std::span<const cplx> symbols);

/// Fraction of differing payload bits. Padding of `tx` is excluded.
double ber_count(const BitBuffer& tx, const BitBuffer& rx);

struct OfdmFrame {
  ComplexSequence samples;
  BitBuffer bits;  // padded payload actually carried
  std::size_t data_symbols = 0;
};

/// Preamble followed by data symbols, cyclic prefix on every symbol.
/// Payload is zero-padded to whole OFDM symbols.
OfdmFrame ofdm_modulate(const OfdmConfig& cfg, const BitBuffer& payload);

/// Time-domain preamble waveform (all training symbols, with CPs).
ComplexSequence ofdm_preamble(const OfdmConfig& cfg);

/// Frequency-domain training value on each occupied subcarrier.
std::vector<cplx> preamble_pattern(const OfdmConfig& cfg);

struct ReceiveResult {
  double ber = 0.5;
  bool detected = false;
  double sinr_est_db = 0.0;
  double peak_correlation = 0.0;
  std::size_t frame_start = 0;
};

/// Detects the frame in `rx`, equalizes and counts bit errors against
/// `tx_bits`. A missed detection is reported as BER 0.5.
ReceiveResult ofdm_receive(const OfdmConfig& cfg, std::span<const cplx> rx,
                           const BitBuffer& tx_bits);

/// Normalized cross-correlation magnitude of `rx` against the preamble at
/// every admissible offset.
std::vector<double> preamble_correlation(const OfdmConfig& cfg, std::span<const cplx> rx);

/// A continuous OFDM transmit signal with random payload, truncated to `n`
/// samples and normalized to unit variance. Used as the SI transmit signal.
ComplexSequence random_ofdm_signal(const OfdmConfig& cfg, std::size_t n, std::uint64_t seed);

}  // namespace siclab::waveform
