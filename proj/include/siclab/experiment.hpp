#pragma once

// Configuration, learning runs, BER/SINR sweeps and their file outputs.
//
// Config grammar (one entry per line):
//   key = value        keys are dotted paths, e.g. train.epochs
//   # comment          blank lines and comments are ignored
// Lists are comma-separated. Unknown keys and malformed values are errors
// that name the offending key and line.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "siclab/strategies.hpp"

namespace siclab::experiment {

class ConfigError : public InvalidArgument {
 public:
  ConfigError(std::string key, const std::string& what) : InvalidArgument(what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::string output_dir = "sic-lab-out";
  std::size_t workers = 1;

  waveform::OfdmConfig ofdm;
  train::FrontendConfig frontend;
  frontend::AdcSpec adc;
  frontend::AgcSpec agc;
  model::ModelShape model;

  // learning runs
  std::vector<train::StrategyKind> strategies = {train::StrategyKind::Bpad, train::StrategyKind::Ste,
                                                 train::StrategyKind::Agc, train::StrategyKind::Dta};
  std::vector<double> lna_gains_db = {30.0, 40.0, 50.0};
  std::size_t epochs = 6000;
  ad::AdamConfig adam;
  train::Batching batching = train::Batching::Corpus;
  std::size_t sequences = 10;
  std::size_t sequence_len = 4096;
  double dta_lna_gain_db = 30.0;
  /// Checkpoint used downstream: the lowest-loss epoch or the last one.
  bool deploy_best = true;

  // BER sweep
  double snr_min_db = 0.0;
  double snr_max_db = 50.0;
  double snr_step_db = 5.0;
  std::size_t frames = 200;
  std::size_t data_symbols = 10;
  std::vector<train::StrategyKind> sweep_strategies = strategies;
  std::vector<double> sweep_lna_gains_db = {30.0, 40.0};

  /// Text the config was parsed from; empty when built programmatically.
  std::string source_text;

  void validate() const;
  std::vector<double> snr_grid() const;
};

/// Every accepted key, in documentation order.
std::vector<std::string> config_keys();
void set_value(ExperimentConfig& cfg, std::string_view key, std::string_view value);
std::string get_value(const ExperimentConfig& cfg, std::string_view key);

ExperimentConfig parse_config(std::string_view text);
/// Reads a config file and applies the SIC_LAB_SEED override.
ExperimentConfig load_config(const std::string& path);
/// Canonical `key = value` rendering of every key.
std::string render_config(const ExperimentConfig& cfg);

/// One trained system: a strategy and, where it has one, its LNA gain.
struct RunSpec {
  train::StrategyKind strategy = train::StrategyKind::Ste;
  std::optional<double> lna_gain_db;

  /// "ste_30", "agc", "dta"
  std::string tag() const;
  auto operator<=>(const RunSpec&) const = default;
};

struct RunFilter {
  std::vector<train::StrategyKind> strategies;  // empty = all configured
  std::vector<double> gains_db;                 // empty = all configured
};

std::vector<RunSpec> learning_runs(const ExperimentConfig& cfg, const RunFilter& filter = {});

train::CorpusConfig corpus_config(const ExperimentConfig& cfg);
train::TrainConfig train_config(const ExperimentConfig& cfg, const RunSpec& run);

struct LearningSummary {
  RunSpec run;
  double initial_residual_dbm = 0.0;
  double final_residual_dbm = 0.0;
  std::size_t best_epoch = 0;
  train::TrainLog log;
};

/// Trains every selected run and writes train_<tag>.csv, train_<tag>.svg,
/// model_<tag>.ckpt, learning.csv (summary), learning.svg, the config echo
/// and the manifest into cfg.output_dir.
std::vector<LearningSummary> run_learning_experiment(const ExperimentConfig& cfg, const RunFilter& filter = {});

struct BerRow {
  std::string strategy;
  double lna_gain_db = 0.0;  // NaN for AGC
  double snr_db = 0.0;
  double sinr_db = 0.0;
  double ber = 0.5;
  double detected_fraction = 0.0;
};

/// Receive-chain configuration of one system under test.
struct SystemUnderTest {
  std::string name;  // strategy column
  /// Fixed LNA gain, or empty for the AGC chain.
  std::optional<double> lna_gain_db;
  /// Model used for analog SIC; null disables cancellation.
  const model::HammersteinModel* model = nullptr;
};

/// Averages BER, detection and SINR over `cfg.frames` test frames at one SNR.
/// SINR is total SOI power over total residual-plus-noise power at the ADC
/// input, accumulated over the frames.
BerRow ber_point(const ExperimentConfig& cfg, const train::Frontend& fe, const SystemUnderTest& sys, double snr_db,
                 std::uint64_t seed);

/// Signals of one test frame, exposed for independent checks.
struct TestFrame {
  ComplexSequence soi;       // x_a, zero outside the frame
  ComplexSequence residual;  // r_a without the SOI: SI residual plus noise
  ComplexSequence digital;   // what the demodulator sees
  waveform::BitBuffer bits;
};
TestFrame make_test_frame(const ExperimentConfig& cfg, const train::Frontend& fe, const SystemUnderTest& sys,
                          double snr_db, std::uint64_t seed);

/// The transceiver the models were trained on.
train::Frontend build_frontend(const ExperimentConfig& cfg);

/// Loads model_<tag>.ckpt for every configured sweep system from
/// `models_dir`, runs the SNR grid and writes ber.csv, ber.svg, the config
/// echo and the manifest into cfg.output_dir.
std::vector<BerRow> run_ber_sweep(const ExperimentConfig& cfg, const std::string& models_dir);

/// Writes ber.csv and ber.svg. Throws on empty rows without touching the
/// directory.
void emit_outputs(const std::vector<BerRow>& rows, const std::string& output_dir);
std::vector<BerRow> read_ber_csv(const std::string& path);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

/// Writes `manifest` listing seed, config, inputs and output hashes.
void write_manifest(const ExperimentConfig& cfg, const std::string& dir, const std::vector<std::string>& inputs = {});

/// Runs `n` independent tasks on up to `workers` threads. Each task writes
/// only its own result slot, so merging order never depends on scheduling.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& task);

}  // namespace siclab::experiment
