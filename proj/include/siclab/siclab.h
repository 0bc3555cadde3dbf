/* C interface of the siclab shared library. */
#ifndef SICLAB_H
#define SICLAB_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define SICLAB_API __attribute__((visibility("default")))
#else
#define SICLAB_API
#endif

typedef enum siclab_status {
  SICLAB_OK = 0,
  SICLAB_ERR_INVALID_ARGUMENT = 1,
  SICLAB_ERR_CONFIG = 2,
  SICLAB_ERR_IO = 3,
  SICLAB_ERR_DIVERGED = 4,
  SICLAB_ERR_INTERNAL = 5
} siclab_status;

typedef struct siclab_config siclab_config;
typedef struct siclab_model siclab_model;

/* Receives one human-readable progress line. */
typedef void (*siclab_log_fn)(const char* line, void* user);

/* Message of the last failing call on this thread ("" if none). */
SICLAB_API const char* siclab_last_error(void);
SICLAB_API const char* siclab_status_string(siclab_status status);

SICLAB_API siclab_status siclab_config_new(siclab_config** out);
/* Reads a config file; applies the SIC_LAB_SEED override. */
SICLAB_API siclab_status siclab_config_load(const char* path, siclab_config** out);
SICLAB_API siclab_status siclab_config_parse(const char* text, siclab_config** out);
SICLAB_API siclab_status siclab_config_set(siclab_config* cfg, const char* key, const char* value);
/* Copies the value (NUL-terminated) into buf when it fits; *needed receives
 * the required size including the terminator. */
SICLAB_API siclab_status siclab_config_get(const siclab_config* cfg, const char* key, char* buf, size_t buf_len,
                                           size_t* needed);
SICLAB_API void siclab_config_free(siclab_config* cfg);

/* strategies / gains: comma-separated filters, NULL or "" for the config's own. */
SICLAB_API siclab_status siclab_run_train(const siclab_config* cfg, const char* strategies, const char* gains,
                                          siclab_log_fn log, void* user);
SICLAB_API siclab_status siclab_run_ber(const siclab_config* cfg, const char* models_dir, siclab_log_fn log,
                                        void* user);
/* Training followed by the BER sweep on the fresh checkpoints. */
SICLAB_API siclab_status siclab_run_all(const siclab_config* cfg, siclab_log_fn log, void* user);

/* Real-valued quantizer applied elementwise. */
SICLAB_API siclab_status siclab_adc_quantize(int bits, double lambda, const double* in, double* out, size_t n);
/* iq: n interleaved (re, im) pairs. */
SICLAB_API siclab_status siclab_power_dbm(const double* iq, size_t n, double* out_dbm);

SICLAB_API siclab_status siclab_model_load(const char* path, siclab_model** out);
/* iq_in / iq_out: n interleaved (re, im) pairs. */
SICLAB_API siclab_status siclab_model_predict(const siclab_model* model, const double* iq_in, size_t n,
                                              double* iq_out);
SICLAB_API void siclab_model_free(siclab_model* model);

#ifdef __cplusplus
}
#endif

#endif
