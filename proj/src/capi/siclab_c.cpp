#include "siclab/siclab.h"

#include <cmath>
#include <cstring>
#include <string>

#include "siclab/experiment.hpp"

struct siclab_config {
  siclab::experiment::ExperimentConfig cfg;
};

struct siclab_model {
  siclab::model::HammersteinModel model;
};

namespace {

thread_local std::string g_last_error;

template <class F>
siclab_status guarded(F&& f) {
  g_last_error.clear();
  try {
    f();
    return SICLAB_OK;
  } catch (const siclab::experiment::ConfigError& e) {
    g_last_error = e.what();
    return SICLAB_ERR_CONFIG;
  } catch (const siclab::train::DivergenceError& e) {
    g_last_error = e.what();
    return SICLAB_ERR_DIVERGED;
  } catch (const siclab::InvalidArgument& e) {
    g_last_error = e.what();
    return SICLAB_ERR_INVALID_ARGUMENT;
  } catch (const siclab::Error& e) {
    g_last_error = e.what();
    return SICLAB_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SICLAB_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return SICLAB_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw siclab::InvalidArgument(what);
}

void emit(siclab_log_fn log, void* user, const std::string& line) {
  if (log) log(line.c_str(), user);
}

std::vector<std::string> split(const char* s) {
  std::vector<std::string> out;
  if (!s || !*s) return out;
  std::string cur;
  for (const char* p = s;; ++p) {
    if (*p == ',' || *p == '\0') {
      const auto b = cur.find_first_not_of(' ');
      const auto e = cur.find_last_not_of(' ');
      if (b != std::string::npos) out.push_back(cur.substr(b, e - b + 1));
      cur.clear();
      if (*p == '\0') break;
    } else {
      cur += *p;
    }
  }
  return out;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void train_impl(const siclab::experiment::ExperimentConfig& cfg, const char* strategies, const char* gains,
                siclab_log_fn log, void* user) {
  namespace ex = siclab::experiment;
  ex::RunFilter filter;
  for (const auto& s : split(strategies)) filter.strategies.push_back(siclab::train::parse_strategy(s));
  for (const auto& g : split(gains)) {
    char* end = nullptr;
    const double v = std::strtod(g.c_str(), &end);
    if (*end != '\0') throw siclab::InvalidArgument("bad gain '" + g + "'");
    filter.gains_db.push_back(v);
  }
  const auto runs = ex::learning_runs(cfg, filter);
  emit(log, user, "training " + std::to_string(runs.size()) + " run(s), " + std::to_string(cfg.epochs) +
                      " epochs each, output in " + cfg.output_dir);
  const auto out = ex::run_learning_experiment(cfg, filter);
  for (const auto& s : out)
    emit(log, user, s.run.tag() + ": residual " + fixed(s.initial_residual_dbm, 2) + " -> " +
                        fixed(s.final_residual_dbm, 2) + " dBm (median of last 100 epochs)");
}

void ber_impl(const siclab::experiment::ExperimentConfig& cfg, const char* models_dir, siclab_log_fn log,
              void* user) {
  require(models_dir && *models_dir, "models directory is required");
  const auto rows = siclab::experiment::run_ber_sweep(cfg, models_dir);
  std::string current;
  for (const auto& r : rows) {
    const auto name = r.strategy + (std::isnan(r.lna_gain_db) ? "" : "_" + fixed(r.lna_gain_db, 0));
    if (name != current) {
      current = name;
      emit(log, user, name + ":");
    }
    emit(log, user, "  snr " + fixed(r.snr_db, 1) + " dB  sinr " + fixed(r.sinr_db, 2) + " dB  ber " +
                        fixed(r.ber, 5) + "  detected " + fixed(r.detected_fraction, 3));
  }
}

}  // namespace

extern "C" {

const char* siclab_last_error(void) { return g_last_error.c_str(); }

const char* siclab_status_string(siclab_status status) {
  switch (status) {
    case SICLAB_OK: return "ok";
    case SICLAB_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SICLAB_ERR_CONFIG: return "config error";
    case SICLAB_ERR_IO: return "i/o or runtime error";
    case SICLAB_ERR_DIVERGED: return "training diverged";
    case SICLAB_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

siclab_status siclab_config_new(siclab_config** out) {
  return guarded([&] {
    require(out, "out is null");
    *out = new siclab_config{};
  });
}

siclab_status siclab_config_load(const char* path, siclab_config** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new siclab_config{siclab::experiment::load_config(path)};
  });
}

siclab_status siclab_config_parse(const char* text, siclab_config** out) {
  return guarded([&] {
    require(text && out, "null argument");
    *out = new siclab_config{siclab::experiment::parse_config(text)};
  });
}

siclab_status siclab_config_set(siclab_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg && key && value, "null argument");
    auto copy = cfg->cfg;
    siclab::experiment::set_value(copy, key, value);
    copy.source_text.clear();
    cfg->cfg = std::move(copy);
  });
}

siclab_status siclab_config_get(const siclab_config* cfg, const char* key, char* buf, size_t buf_len,
                                size_t* needed) {
  return guarded([&] {
    require(cfg && key, "null argument");
    const auto v = siclab::experiment::get_value(cfg->cfg, key);
    if (needed) *needed = v.size() + 1;
    if (buf && buf_len > v.size()) std::memcpy(buf, v.c_str(), v.size() + 1);
    else if (buf) throw siclab::InvalidArgument("buffer too small");
  });
}

void siclab_config_free(siclab_config* cfg) { delete cfg; }

siclab_status siclab_run_train(const siclab_config* cfg, const char* strategies, const char* gains,
                               siclab_log_fn log, void* user) {
  return guarded([&] {
    require(cfg, "config is null");
    train_impl(cfg->cfg, strategies, gains, log, user);
  });
}

siclab_status siclab_run_ber(const siclab_config* cfg, const char* models_dir, siclab_log_fn log, void* user) {
  return guarded([&] {
    require(cfg, "config is null");
    ber_impl(cfg->cfg, models_dir, log, user);
  });
}

siclab_status siclab_run_all(const siclab_config* cfg, siclab_log_fn log, void* user) {
  return guarded([&] {
    require(cfg, "config is null");
    train_impl(cfg->cfg, nullptr, nullptr, log, user);
    ber_impl(cfg->cfg, cfg->cfg.output_dir.c_str(), log, user);
  });
}

siclab_status siclab_adc_quantize(int bits, double lambda, const double* in, double* out, size_t n) {
  return guarded([&] {
    require(n == 0 || (in && out), "null buffer");
    const siclab::frontend::AdcSpec spec{bits, lambda};
    spec.validate();
    for (size_t i = 0; i < n; ++i) out[i] = siclab::frontend::adc_quantize(spec, in[i]);
  });
}

siclab_status siclab_power_dbm(const double* iq, size_t n, double* out_dbm) {
  return guarded([&] {
    require(iq && out_dbm, "null argument");
    siclab::ComplexSequence x(n);
    for (size_t k = 0; k < n; ++k) x[k] = {iq[2 * k], iq[2 * k + 1]};
    *out_dbm = siclab::dsp::power_dbm(x).value;
  });
}

siclab_status siclab_model_load(const char* path, siclab_model** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new siclab_model{siclab::model::load_checkpoint(path)};
  });
}

siclab_status siclab_model_predict(const siclab_model* model, const double* iq_in, size_t n, double* iq_out) {
  return guarded([&] {
    require(model && iq_in && iq_out, "null argument");
    require(n > 0, "empty input");
    siclab::ComplexSequence x(n);
    for (size_t k = 0; k < n; ++k) x[k] = {iq_in[2 * k], iq_in[2 * k + 1]};
    const auto y = model->model.predict(x);
    for (size_t k = 0; k < n; ++k) {
      iq_out[2 * k] = y[k].real();
      iq_out[2 * k + 1] = y[k].imag();
    }
  });
}

void siclab_model_free(siclab_model* model) { delete model; }

}  // extern "C"
