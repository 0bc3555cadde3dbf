#include "siclab/experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "siclab/svg.hpp"

namespace siclab::experiment {
namespace fs = std::filesystem;
using train::StrategyKind;

namespace {

constexpr std::uint64_t kStreamModelInit = 10;
constexpr std::uint64_t kStreamTest = 100;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double to_double(std::string_view key, std::string_view text) {
  const std::string t = trim(text);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || *end != '\0') throw ConfigError(std::string(key), std::string(key) + ": expected a number, got '" + t + "'");
  return v;
}

std::uint64_t to_uint(std::string_view key, std::string_view text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size())
    throw ConfigError(std::string(key), std::string(key) + ": expected a non-negative integer, got '" + t + "'");
  return v;
}

std::vector<double> to_doubles(std::string_view key, std::string_view text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (const auto& item : split_list(text)) out.push_back(to_double(key, item));
  return out;
}

std::vector<StrategyKind> to_strategies(std::string_view key, std::string_view text) {
  std::vector<StrategyKind> out;
  if (trim(text).empty()) return out;
  for (const auto& item : split_list(text)) {
    try {
      out.push_back(train::parse_strategy(item));
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string(key), std::string(key) + ": " + e.what());
    }
  }
  return out;
}

cplx to_complex(std::string_view key, std::string_view text) {
  const auto parts = split_list(text);
  if (parts.size() != 2) throw ConfigError(std::string(key), std::string(key) + ": expected 're, im'");
  return {to_double(key, parts[0]), to_double(key, parts[1])};
}

template <class T>
std::string join(const std::vector<T>& v, std::string (*f)(T)) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + f(v[i]);
  return out;
}

std::string strategy_name(StrategyKind k) { return train::to_string(k); }

struct KeyDef {
  const char* name;
  std::function<void(ExperimentConfig&, std::string_view key, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define SIZE_KEY(NAME, FIELD)                                                                      \
  KeyDef {                                                                                         \
    NAME, [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.FIELD = to_uint(k, v); }, \
        [](const ExperimentConfig& c) { return std::to_string(c.FIELD); }                          \
  }
#define DOUBLE_KEY(NAME, FIELD)                                                                      \
  KeyDef {                                                                                           \
    NAME, [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.FIELD = to_double(k, v); }, \
        [](const ExperimentConfig& c) { return fmt(c.FIELD); }                                       \
  }
#define INT_KEY(NAME, FIELD)                                                                          \
  KeyDef {                                                                                            \
    NAME, [](ExperimentConfig& c, std::string_view k, std::string_view v) {                           \
      c.FIELD = static_cast<int>(to_uint(k, v));                                                      \
    },                                                                                                \
        [](const ExperimentConfig& c) { return std::to_string(c.FIELD); }                             \
  }
#define COMPLEX_KEY(NAME, FIELD)                                                                       \
  KeyDef {                                                                                             \
    NAME, [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.FIELD = to_complex(k, v); }, \
        [](const ExperimentConfig& c) { return fmt(c.FIELD.real()) + ", " + fmt(c.FIELD.imag()); }     \
  }

const std::vector<KeyDef>& key_table() {
  static const std::vector<KeyDef> table = {
      SIZE_KEY("seed", seed),
      KeyDef{"output_dir", [](ExperimentConfig& c, std::string_view, std::string_view v) { c.output_dir = trim(v); },
             [](const ExperimentConfig& c) { return c.output_dir; }},
      SIZE_KEY("workers", workers),

      SIZE_KEY("waveform.nfft", ofdm.nfft),
      SIZE_KEY("waveform.used_subcarriers", ofdm.used_subcarriers),
      SIZE_KEY("waveform.cp_len", ofdm.cp_len),
      KeyDef{"waveform.pilots",
             [](ExperimentConfig& c, std::string_view k, std::string_view v) {
               c.ofdm.pilot_indices.clear();
               for (double d : to_doubles(k, v)) {
                 if (d != std::floor(d)) throw ConfigError(std::string(k), std::string(k) + ": pilots must be integers");
                 c.ofdm.pilot_indices.push_back(static_cast<int>(d));
               }
             },
             [](const ExperimentConfig& c) {
               std::string out;
               for (std::size_t i = 0; i < c.ofdm.pilot_indices.size(); ++i)
                 out += (i ? ", " : "") + std::to_string(c.ofdm.pilot_indices[i]);
               return out;
             }},
      SIZE_KEY("waveform.preamble_symbols", ofdm.preamble_symbols),
      DOUBLE_KEY("waveform.detect_threshold", ofdm.detect_threshold),

      COMPLEX_KEY("frontend.pa.a1", frontend.pa.a1),
      COMPLEX_KEY("frontend.pa.a3", frontend.pa.a3),
      COMPLEX_KEY("frontend.pa.a5", frontend.pa.a5),
      DOUBLE_KEY("frontend.pa.output_dbm", frontend.pa.output_power.value),
      SIZE_KEY("frontend.channel.length", frontend.channel.length),
      DOUBLE_KEY("frontend.channel.isolation_db", frontend.channel.passive_isolation_db),
      DOUBLE_KEY("frontend.channel.decay", frontend.channel.decay),
      DOUBLE_KEY("frontend.noise_dbm", frontend.noise_power.value),
      INT_KEY("frontend.adc.bits", adc.bits),
      DOUBLE_KEY("frontend.adc.lambda", adc.lambda),
      SIZE_KEY("frontend.agc.frame_len", agc.frame_len),
      DOUBLE_KEY("frontend.agc.setpoint_dbm", agc.setpoint.value),
      DOUBLE_KEY("frontend.agc.gain_min_db", agc.gain_min_db),
      DOUBLE_KEY("frontend.agc.gain_max_db", agc.gain_max_db),
      INT_KEY("frontend.agc.rssi_bits", agc.rssi_bits),

      SIZE_KEY("model.hidden", model.hidden),
      SIZE_KEY("model.fir_len", model.fir_len),
      DOUBLE_KEY("model.output_dbm", model.output_level.value),

      KeyDef{"train.strategies",
             [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.strategies = to_strategies(k, v); },
             [](const ExperimentConfig& c) { return join(c.strategies, strategy_name); }},
      KeyDef{"train.lna_gains_db",
             [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.lna_gains_db = to_doubles(k, v); },
             [](const ExperimentConfig& c) { return join(c.lna_gains_db, fmt); }},
      SIZE_KEY("train.epochs", epochs),
      DOUBLE_KEY("train.lr", adam.lr),
      DOUBLE_KEY("train.beta1", adam.beta1),
      DOUBLE_KEY("train.beta2", adam.beta2),
      DOUBLE_KEY("train.eps", adam.eps),
      KeyDef{"train.batching",
             [](ExperimentConfig& c, std::string_view k, std::string_view v) {
               const auto t = trim(v);
               if (t == "corpus") c.batching = train::Batching::Corpus;
               else if (t == "sequence") c.batching = train::Batching::Sequence;
               else throw ConfigError(std::string(k), std::string(k) + ": expected corpus or sequence, got '" + t + "'");
             },
             [](const ExperimentConfig& c) {
               return std::string(c.batching == train::Batching::Corpus ? "corpus" : "sequence");
             }},
      SIZE_KEY("train.sequences", sequences),
      SIZE_KEY("train.sequence_len", sequence_len),
      DOUBLE_KEY("train.dta_lna_gain_db", dta_lna_gain_db),
      KeyDef{"train.deploy",
             [](ExperimentConfig& c, std::string_view k, std::string_view v) {
               const auto t = trim(v);
               if (t == "best") c.deploy_best = true;
               else if (t == "final") c.deploy_best = false;
               else throw ConfigError(std::string(k), std::string(k) + ": expected best or final, got '" + t + "'");
             },
             [](const ExperimentConfig& c) { return std::string(c.deploy_best ? "best" : "final"); }},

      DOUBLE_KEY("sweep.snr_min_db", snr_min_db),
      DOUBLE_KEY("sweep.snr_max_db", snr_max_db),
      DOUBLE_KEY("sweep.snr_step_db", snr_step_db),
      SIZE_KEY("sweep.frames", frames),
      SIZE_KEY("sweep.data_symbols", data_symbols),
      KeyDef{"sweep.strategies",
             [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.sweep_strategies = to_strategies(k, v); },
             [](const ExperimentConfig& c) { return join(c.sweep_strategies, strategy_name); }},
      KeyDef{"sweep.lna_gains_db",
             [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.sweep_lna_gains_db = to_doubles(k, v); },
             [](const ExperimentConfig& c) { return join(c.sweep_lna_gains_db, fmt); }},
  };
  return table;
}

const KeyDef& find_key(std::string_view key) {
  for (const auto& k : key_table())
    if (key == k.name) return k;
  throw ConfigError(std::string(key), "unknown config key '" + std::string(key) + "'");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
  if (!f) throw Error("write failed for " + path.string());
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error("cannot create output directory " + dir);
}

void echo_config(const ExperimentConfig& cfg) {
  const fs::path dir(cfg.output_dir);
  write_text(dir / "config.txt", cfg.source_text.empty() ? render_config(cfg) : cfg.source_text);
  write_text(dir / "config.resolved.txt", render_config(cfg));
}

std::string gain_suffix(double g) { return fmt(g); }

}  // namespace

// ---------------------------------------------------------------- config

void ExperimentConfig::validate() const {
  auto fail = [](const char* key, const std::string& msg) { throw ConfigError(key, std::string(key) + ": " + msg); };
  try {
    ofdm.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("waveform", std::string("waveform: ") + e.what());
  }
  try {
    frontend.pa.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("frontend.pa", std::string("frontend.pa: ") + e.what());
  }
  try {
    adc.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("frontend.adc", std::string("frontend.adc: ") + e.what());
  }
  try {
    agc.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("frontend.agc", std::string("frontend.agc: ") + e.what());
  }
  if (frontend.channel.length == 0) fail("frontend.channel.length", "must be >= 1");
  if (model.hidden == 0) fail("model.hidden", "must be >= 1");
  if (model.fir_len == 0) fail("model.fir_len", "must be >= 1");
  if (epochs == 0) fail("train.epochs", "must be >= 1");
  if (!(adam.lr > 0.0)) fail("train.lr", "must be positive");
  if (sequences == 0) fail("train.sequences", "must be >= 1");
  if (sequence_len < agc.frame_len) fail("train.sequence_len", "must hold at least one AGC frame");
  if (workers == 0) fail("workers", "must be >= 1");
  if (frames == 0) fail("sweep.frames", "must be >= 1");
  if (data_symbols == 0) fail("sweep.data_symbols", "must be >= 1");
  if (!(snr_step_db > 0.0)) fail("sweep.snr_step_db", "must be positive");
  if (snr_max_db < snr_min_db) fail("sweep.snr_max_db", "must be >= sweep.snr_min_db");
  if (output_dir.empty()) fail("output_dir", "must not be empty");
}

std::vector<double> ExperimentConfig::snr_grid() const {
  std::vector<double> grid;
  for (std::size_t i = 0;; ++i) {
    const double snr = snr_min_db + static_cast<double>(i) * snr_step_db;
    if (snr > snr_max_db + 1e-9 * snr_step_db) break;
    grid.push_back(snr);
  }
  return grid;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& k : key_table()) out.emplace_back(k.name);
  return out;
}

void set_value(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  find_key(key).set(cfg, key, value);
}

std::string get_value(const ExperimentConfig& cfg, std::string_view key) { return find_key(key).get(cfg); }

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("", "line " + std::to_string(line_no) + ": expected 'key = value'");
    const auto key = trim(std::string_view(t).substr(0, eq));
    const auto value = trim(std::string_view(t).substr(eq + 1));
    try {
      set_value(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(e.key(), "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  cfg.source_text = std::string(text);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot read config " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  auto cfg = parse_config(ss.str());
  if (const char* env = std::getenv("SIC_LAB_SEED"); env && *env) cfg.seed = to_uint("SIC_LAB_SEED", env);
  return cfg;
}

std::string render_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& k : key_table()) out += std::string(k.name) + " = " + k.get(cfg) + "\n";
  return out;
}

// ---------------------------------------------------------------- runs

std::string RunSpec::tag() const {
  auto t = train::to_string(strategy);
  if (lna_gain_db) t += "_" + gain_suffix(*lna_gain_db);
  return t;
}

std::vector<RunSpec> learning_runs(const ExperimentConfig& cfg, const RunFilter& filter) {
  const auto& strategies = filter.strategies.empty() ? cfg.strategies : filter.strategies;
  const auto& gains = filter.gains_db.empty() ? cfg.lna_gains_db : filter.gains_db;
  std::vector<RunSpec> runs;
  for (auto kind : {StrategyKind::Bpad, StrategyKind::Ste, StrategyKind::Agc, StrategyKind::Dta}) {
    if (std::find(strategies.begin(), strategies.end(), kind) == strategies.end()) continue;
    if (train::uses_lna(kind)) {
      for (double g : gains) runs.push_back({kind, g});
    } else {
      runs.push_back({kind, std::nullopt});
    }
  }
  return runs;
}

train::CorpusConfig corpus_config(const ExperimentConfig& cfg) {
  train::CorpusConfig c;
  c.sequences = cfg.sequences;
  c.length = cfg.sequence_len;
  c.ofdm = cfg.ofdm;
  c.frontend = cfg.frontend;
  return c;
}

train::TrainConfig train_config(const ExperimentConfig& cfg, const RunSpec& run) {
  train::TrainConfig t;
  t.strategy = run.strategy;
  if (run.lna_gain_db) t.lna_gain_db = *run.lna_gain_db;
  else if (run.strategy == StrategyKind::Dta) t.lna_gain_db = cfg.dta_lna_gain_db;
  else t.lna_gain_db = 0.0;
  t.agc = cfg.agc;
  t.adc = cfg.adc;
  t.epochs = cfg.epochs;
  t.adam = cfg.adam;
  t.batching = cfg.batching;
  t.seed = cfg.seed;
  return t;
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& task) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  std::vector<std::exception_ptr> errors(n);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            task(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<LearningSummary> run_learning_experiment(const ExperimentConfig& cfg, const RunFilter& filter) {
  cfg.validate();
  const auto runs = learning_runs(cfg, filter);
  if (runs.empty()) throw InvalidArgument("no learning runs selected");
  ensure_dir(cfg.output_dir);
  const fs::path dir(cfg.output_dir);

  auto corpus = train::make_corpus(corpus_config(cfg), cfg.seed);
  train::dta_record_dataset(corpus, cfg.adc);
  const auto init = model::HammersteinModel::init(dsp::derive_seed(cfg.seed, kStreamModelInit), cfg.model);

  std::vector<LearningSummary> out(runs.size());
  std::vector<train::TrainResult> results(runs.size());
  parallel_for(runs.size(), cfg.workers, [&](std::size_t i) {
    results[i] = train::train(train_config(cfg, runs[i]), init, corpus);
  });

  plot::Figure all;
  all.title = "Residual SI power during training";
  all.x_label = "epoch";
  all.y_label = "analog residual power [dBm]";
  all.hlines = {-35.0};
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& res = results[i];
    const auto tag = runs[i].tag();
    auto& s = out[i];
    s.run = runs[i];
    s.log = res.log;
    s.initial_residual_dbm = res.log.rows.front().residual_dbm_analog;
    s.final_residual_dbm = train::final_residual_dbm(res.log);
    s.best_epoch = res.best_epoch;

    train::write_train_csv((dir / ("train_" + tag + ".csv")).string(), res.log);
    plot::Series series{tag, {}, {}};
    for (const auto& r : res.log.rows) {
      series.x.push_back(static_cast<double>(r.epoch));
      series.y.push_back(r.residual_dbm_analog);
    }
    plot::Figure fig;
    fig.title = "Residual SI power, " + tag;
    fig.x_label = all.x_label;
    fig.y_label = all.y_label;
    fig.hlines = {-35.0};
    fig.series.push_back(series);
    plot::write_svg((dir / ("train_" + tag + ".svg")).string(), fig);
    all.series.push_back(std::move(series));

    const auto tc = train_config(cfg, runs[i]);
    std::map<std::string, std::string> prov = {
        {"strategy", train::to_string(runs[i].strategy)},
        {"lna_gain_db", fmt(tc.lna_gain_db)},
        {"seed", std::to_string(cfg.seed)},
        {"epochs", std::to_string(cfg.epochs)},
        {"deploy", cfg.deploy_best ? "best" : "final"},
        {"best_epoch", std::to_string(res.best_epoch)},
    };
    for (const auto& k : key_table()) prov["cfg." + std::string(k.name)] = k.get(cfg);
    model::save_checkpoint((dir / ("model_" + tag + ".ckpt")).string(),
                           cfg.deploy_best ? res.best_model : res.final_model, prov);
  }
  plot::write_svg((dir / "learning.svg").string(), all);

  std::ostringstream summary;
  summary << "run,strategy,lna_gain_db,initial_residual_dbm,final_residual_dbm,best_epoch\n";
  for (const auto& s : out) {
    summary << s.run.tag() << "," << train::to_string(s.run.strategy) << ","
            << (s.run.lna_gain_db ? fmt(*s.run.lna_gain_db) : "nan") << "," << fmt(s.initial_residual_dbm) << ","
            << fmt(s.final_residual_dbm) << "," << s.best_epoch << "\n";
  }
  write_text(dir / "learning.csv", summary.str());
  echo_config(cfg);
  write_manifest(cfg, cfg.output_dir);
  return out;
}

// ---------------------------------------------------------------- BER

train::Frontend build_frontend(const ExperimentConfig& cfg) {
  auto c = corpus_config(cfg);
  return train::make_corpus(c, cfg.seed).frontend;
}

TestFrame make_test_frame(const ExperimentConfig& cfg, const train::Frontend& fe, const SystemUnderTest& sys,
                          double snr_db, std::uint64_t seed) {
  const auto& o = cfg.ofdm;
  TestFrame t;
  const auto payload = waveform::random_bits(cfg.data_symbols * o.bits_per_symbol(), dsp::derive_seed(seed, 1));
  const auto frame = waveform::ofdm_modulate(o, payload);
  t.bits = frame.bits;
  const std::size_t lead = o.symbol_len() + dsp::derive_seed(seed, 4) % o.symbol_len();
  const std::size_t total = lead + frame.samples.size() + o.symbol_len();

  const auto x = dsp::scale_to_dbm(frame.samples, DbmPower{fe.noise_power.value + snr_db});
  t.soi.assign(total, cplx{});
  std::copy(x.begin(), x.end(), t.soi.begin() + static_cast<std::ptrdiff_t>(lead));

  const auto s = waveform::random_ofdm_signal(o, total, dsp::derive_seed(seed, 2));
  t.residual = fe.analog(s, {}, dsp::derive_seed(seed, 3));
  if (sys.model) {
    const auto pred = sys.model->predict(s);
    for (std::size_t k = 0; k < total; ++k) t.residual[k] -= pred[k];
  }
  ComplexSequence r_a(total);
  for (std::size_t k = 0; k < total; ++k) r_a[k] = t.residual[k] + t.soi[k];

  if (sys.lna_gain_db) {
    const double alpha = dsp::db_to_amplitude(*sys.lna_gain_db);
    for (auto& v : r_a) v *= alpha;
    t.digital = frontend::adc_quantize(cfg.adc, r_a);
  } else {
    const auto trace = frontend::agc_gains(cfg.agc, r_a);
    const auto applied = trace.applied_amplitudes(total);
    const auto reported = trace.reported_amplitudes(total);
    for (std::size_t k = 0; k < total; ++k) r_a[k] *= applied[k];
    t.digital = frontend::adc_quantize(cfg.adc, r_a);
    for (std::size_t k = 0; k < total; ++k) t.digital[k] /= reported[k];
  }
  return t;
}

BerRow ber_point(const ExperimentConfig& cfg, const train::Frontend& fe, const SystemUnderTest& sys, double snr_db,
                 std::uint64_t seed) {
  BerRow row;
  row.strategy = sys.name;
  row.lna_gain_db = sys.lna_gain_db ? *sys.lna_gain_db : std::nan("");
  row.snr_db = snr_db;
  double ber = 0.0, detected = 0.0, p_soi = 0.0, p_res = 0.0;
  for (std::size_t f = 0; f < cfg.frames; ++f) {
    const auto t = make_test_frame(cfg, fe, sys, snr_db, dsp::derive_seed(seed, f));
    const auto rx = waveform::ofdm_receive(cfg.ofdm, t.digital, t.bits);
    ber += rx.ber;
    detected += rx.detected ? 1.0 : 0.0;
    for (std::size_t k = 0; k < t.soi.size(); ++k) {
      if (t.soi[k] == cplx{}) continue;
      p_soi += std::norm(t.soi[k]);
      p_res += std::norm(t.residual[k]);
    }
  }
  const double n = static_cast<double>(cfg.frames);
  row.ber = ber / n;
  row.detected_fraction = detected / n;
  row.sinr_db = 10.0 * std::log10(p_soi / p_res);
  return row;
}

std::vector<BerRow> run_ber_sweep(const ExperimentConfig& cfg, const std::string& models_dir) {
  cfg.validate();
  struct Entry {
    std::string tag;
    SystemUnderTest sys;
  };
  std::vector<Entry> entries;
  std::vector<std::unique_ptr<model::HammersteinModel>> models;
  std::vector<std::string> inputs;
  auto add = [&](const RunSpec& run, std::optional<double> chain_gain) {
    const auto path = (fs::path(models_dir) / ("model_" + run.tag() + ".ckpt")).string();
    if (!fs::exists(path)) throw Error("missing checkpoint " + path + " (run `sic-lab train` first)");
    models.push_back(std::make_unique<model::HammersteinModel>(model::load_checkpoint(path)));
    inputs.push_back(path);
    entries.push_back({run.tag(), {train::to_string(run.strategy), chain_gain, models.back().get()}});
  };
  for (auto kind : {StrategyKind::Bpad, StrategyKind::Ste, StrategyKind::Agc, StrategyKind::Dta}) {
    if (std::find(cfg.sweep_strategies.begin(), cfg.sweep_strategies.end(), kind) == cfg.sweep_strategies.end())
      continue;
    if (train::uses_lna(kind)) {
      for (double g : cfg.sweep_lna_gains_db) add({kind, g}, g);
    } else if (kind == StrategyKind::Agc) {
      add({kind, std::nullopt}, std::nullopt);
    } else {
      add({kind, std::nullopt}, cfg.dta_lna_gain_db);
    }
  }
  if (entries.empty()) throw InvalidArgument("no sweep systems selected");

  const auto fe = build_frontend(cfg);
  const auto grid = cfg.snr_grid();
  std::vector<BerRow> rows(entries.size() * grid.size());
  parallel_for(rows.size(), cfg.workers, [&](std::size_t i) {
    const auto& e = entries[i / grid.size()];
    const std::size_t j = i % grid.size();
    // common test frames for every system at a given SNR
    rows[i] = ber_point(cfg, fe, e.sys, grid[j], dsp::derive_seed(cfg.seed, kStreamTest, j));
  });
  ensure_dir(cfg.output_dir);
  emit_outputs(rows, cfg.output_dir);
  echo_config(cfg);
  write_manifest(cfg, cfg.output_dir, inputs);
  return rows;
}

void emit_outputs(const std::vector<BerRow>& rows, const std::string& output_dir) {
  if (rows.empty()) throw InvalidArgument("emit_outputs: no rows");
  std::ostringstream csv;
  csv << "strategy,lna_gain_db,snr_db,sinr_db,ber,detected_fraction\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.strategy.c_str(), r.lna_gain_db, r.snr_db,
                  r.sinr_db, r.ber, r.detected_fraction);
    csv << buf;
  }

  plot::Figure fig;
  fig.title = "BER and SINR after SIC";
  fig.x_label = "SNR [dB]";
  fig.y_label = "BER";
  fig.y2_label = "SINR [dB] (dashed)";
  fig.log_y = true;
  fig.y_range = std::pair{1e-5, 1.0};
  std::vector<std::string> order;
  for (const auto& r : rows) {
    const auto name = r.strategy + (std::isnan(r.lna_gain_db) ? std::string() : " " + fmt(r.lna_gain_db) + " dB");
    if (std::find(order.begin(), order.end(), name) == order.end()) order.push_back(name);
  }
  for (const auto& name : order) {
    plot::Series ber{name, {}, {}}, sinr{name + " SINR", {}, {}, true};
    for (const auto& r : rows) {
      const auto n = r.strategy + (std::isnan(r.lna_gain_db) ? std::string() : " " + fmt(r.lna_gain_db) + " dB");
      if (n != name) continue;
      ber.x.push_back(r.snr_db);
      ber.y.push_back(std::max(r.ber, 1e-5));
      sinr.x.push_back(r.snr_db);
      sinr.y.push_back(r.sinr_db);
    }
    fig.series.push_back(std::move(ber));
    fig.series.push_back(std::move(sinr));
  }
  const auto svg = plot::render_svg(fig);

  ensure_dir(output_dir);
  const fs::path dir(output_dir);
  write_text(dir / "ber.csv", csv.str());
  write_text(dir / "ber.svg", svg);
}

std::vector<BerRow> read_ber_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read " + path);
  std::string line;
  std::getline(f, line);
  if (line != "strategy,lna_gain_db,snr_db,sinr_db,ber,detected_fraction") throw Error("unexpected header in " + path);
  std::vector<BerRow> rows;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto fields = split_list(line);
    if (fields.size() != 6) throw Error("malformed row in " + path + ": " + line);
    BerRow r;
    r.strategy = fields[0];
    r.lna_gain_db = std::strtod(fields[1].c_str(), nullptr);
    r.snr_db = std::strtod(fields[2].c_str(), nullptr);
    r.sinr_db = std::strtod(fields[3].c_str(), nullptr);
    r.ber = std::strtod(fields[4].c_str(), nullptr);
    r.detected_fraction = std::strtod(fields[5].c_str(), nullptr);
    rows.push_back(r);
  }
  return rows;
}

// ---------------------------------------------------------------- manifest

std::string sha256_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot read " + path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256: init failed");
  std::vector<char> buf(1 << 16);
  while (f) {
    f.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (f.gcount() > 0 && EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(f.gcount())) != 1)
      throw Error("sha256: update failed");
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(ctx.get(), md, &len) != 1) throw Error("sha256: final failed");
  std::string hex;
  char two[3];
  for (unsigned i = 0; i < len; ++i) {
    std::snprintf(two, sizeof two, "%02x", md[i]);
    hex += two;
  }
  return hex;
}

void write_manifest(const ExperimentConfig& cfg, const std::string& dir, const std::vector<std::string>& inputs) {
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() != "manifest") files.push_back(e.path().filename().string());
  std::sort(files.begin(), files.end());

  std::ostringstream m;
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char ts[32];
  std::strftime(ts, sizeof ts, "%Y-%m-%dT%H:%M:%SZ", &tm);
  m << "timestamp " << ts << "\n";
  m << "seed " << cfg.seed << "\n";
  for (const auto& in : inputs) m << "input " << in << " sha256 " << sha256_file(in) << "\n";
  for (const auto& f : files) m << "output " << f << " sha256 " << sha256_file((fs::path(dir) / f).string()) << "\n";
  write_text(fs::path(dir) / "manifest", m.str());
}

}  // namespace siclab::experiment
