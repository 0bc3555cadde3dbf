#pragma once

// The four ADC-aware ways of training the SI model:
//   BPAD  residual -> LNA -> saturation (differentiable in range) -> ADC noise
//   STE   residual -> LNA -> ADC noise (identity in the backward pass)
//   AGC   residual -> per-frame gain -> saturation -> ADC noise -> 1/reported gain
//   DTA   offline fit of the model to ADC recordings made without LNA gain

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "siclab/autodiff.hpp"
#include "siclab/frontend.hpp"
#include "siclab/sic_model.hpp"
#include "siclab/waveform.hpp"

namespace siclab::train {

enum class StrategyKind { Bpad, Ste, Agc, Dta };

/// Case-insensitive "bpad" | "ste" | "agc" | "dta".
StrategyKind parse_strategy(std::string_view name);
std::string to_string(StrategyKind kind);
/// Strategies whose graph contains an LNA gain.
bool uses_lna(StrategyKind kind);

/// Thrown when the training loss turns non-finite.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t epoch, const std::string& what) : Error(what), epoch_(epoch) {}
  std::size_t epoch() const { return epoch_; }

 private:
  std::size_t epoch_;
};

/// Transmitter and coupling path shared by training and evaluation.
struct FrontendConfig {
  frontend::PaModel pa;
  frontend::SiChannelParams channel;
  DbmPower noise_power{-77.0};
};

struct Frontend {
  frontend::PaModel pa;
  frontend::SiChannel channel;
  DbmPower noise_power{-77.0};

  /// y_a = h * PA(s) + soi + noise, with the noise drawn from `noise_seed`.
  ComplexSequence analog(std::span<const cplx> s, std::span<const cplx> soi,
                         std::uint64_t noise_seed) const;
};

struct TrainingSequence {
  ComplexSequence s;    // digital transmit samples
  ComplexSequence y_a;  // analog SI plus noise at the receiver input, SOI absent
  ComplexSequence y_q;  // ADC recording of y_a without LNA (DTA only)
};

struct Corpus {
  Frontend frontend;
  std::vector<TrainingSequence> sequences;
};

struct CorpusConfig {
  std::size_t sequences = 10;
  std::size_t length = 4096;
  waveform::OfdmConfig ofdm;
  FrontendConfig frontend;
};

/// Seeded transmit corpus, a fixed SI channel normalized on it, and the
/// received SI for every sequence.
Corpus make_corpus(const CorpusConfig& cfg, std::uint64_t seed);

/// Fills y_q of every sequence with adc_quantize(y_a).
void dta_record_dataset(Corpus& corpus, const frontend::AdcSpec& adc);

enum class Batching {
  /// One Adam step per sequence, in corpus order.
  Sequence,
  /// One Adam step per epoch on the gradient averaged over the corpus.
  Corpus,
};

struct TrainConfig {
  StrategyKind strategy = StrategyKind::Ste;
  /// LNA gain in the BPAD/STE graphs; for DTA the gain of the deployed chain,
  /// used only for the logged saturation statistics.
  double lna_gain_db = 30.0;
  frontend::AgcSpec agc;
  frontend::AdcSpec adc;
  std::size_t epochs = 6000;
  ad::AdamConfig adam;
  Batching batching = Batching::Corpus;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Per-sequence forward values of one strategy graph.
struct GraphOutputs {
  ad::Var loss;
  ad::CVar residual_analog;   // y_a - model(s)
  ad::CVar residual_digital;  // what the digital side observes
  /// ADC output before any digital gain compensation.
  ComplexSequence adc_output;
};

/// Wires model, subtraction, gain and ADC for one sequence on `tape`.
GraphOutputs build_residual_graph(const TrainConfig& cfg, model::HammersteinModel& m,
                                  const TrainingSequence& seq, ad::Tape& tape);

struct TrainRow {
  std::size_t epoch = 0;
  double residual_dbm_analog = 0.0;
  double residual_dbm_digital = 0.0;
  double saturated_fraction = 0.0;
  double loss = 0.0;
};

/// Rows 0..epochs-1 describe the model before the updates of that epoch;
/// a final row numbered `epochs` describes the trained model.
struct TrainLog {
  std::vector<TrainRow> rows;
};

struct TrainResult {
  TrainLog log;
  model::HammersteinModel final_model;
  /// Parameters of the epoch with the lowest training loss.
  model::HammersteinModel best_model;
  std::size_t best_epoch = 0;
};

/// Forward-only statistics of `m` on the whole corpus (no parameter change).
TrainRow evaluate(const TrainConfig& cfg, const model::HammersteinModel& m, const Corpus& corpus);

TrainResult train(const TrainConfig& cfg, model::HammersteinModel m, const Corpus& corpus);

/// Median analog residual over the last `window` rows, in dBm.
double final_residual_dbm(const TrainLog& log, std::size_t window = 100);

void write_train_csv(const std::string& path, const TrainLog& log);
TrainLog read_train_csv(const std::string& path);

}  // namespace siclab::train
