#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "siclab/siclab.h"

namespace fs = std::filesystem;

TEST_CASE("C API: config set/get and error reporting") {
  siclab_config* cfg = nullptr;
  REQUIRE(siclab_config_new(&cfg) == SICLAB_OK);
  CHECK(siclab_config_set(cfg, "train.epochs", "12") == SICLAB_OK);
  size_t needed = 0;
  CHECK(siclab_config_get(cfg, "train.epochs", nullptr, 0, &needed) == SICLAB_OK);
  CHECK(needed == 3);
  char buf[16];
  CHECK(siclab_config_get(cfg, "train.epochs", buf, sizeof buf, nullptr) == SICLAB_OK);
  CHECK(std::string(buf) == "12");
  CHECK(siclab_config_get(cfg, "train.epochs", buf, 2, nullptr) == SICLAB_ERR_INVALID_ARGUMENT);

  CHECK(siclab_config_set(cfg, "train.bogus", "1") == SICLAB_ERR_CONFIG);
  CHECK(std::string(siclab_last_error()).find("train.bogus") != std::string::npos);
  CHECK(siclab_config_set(cfg, "seed", "3") == SICLAB_OK);
  CHECK(std::string(siclab_last_error()).empty());
  CHECK(siclab_config_set(nullptr, "seed", "3") == SICLAB_ERR_INVALID_ARGUMENT);
  siclab_config_free(cfg);

  siclab_config* bad = nullptr;
  CHECK(siclab_config_parse("model.hidden = 0\n", &bad) == SICLAB_ERR_CONFIG);
  CHECK(bad == nullptr);
  CHECK(siclab_config_load("/nonexistent/file.cfg", &bad) == SICLAB_ERR_IO);
  CHECK(std::string(siclab_status_string(SICLAB_ERR_DIVERGED)) == "training diverged");
}

TEST_CASE("C API: quantizer and power helpers") {
  const double in[3] = {0.0, 5.0, -0.3};
  double out[3];
  REQUIRE(siclab_adc_quantize(12, 1.0, in, out, 3) == SICLAB_OK);
  CHECK(out[0] == doctest::Approx(1.0 / 4095.0));
  CHECK(out[1] == 1.0);
  CHECK(siclab_adc_quantize(0, 1.0, in, out, 3) == SICLAB_ERR_INVALID_ARGUMENT);
  const double iq[4] = {1.0, 0.0, 0.0, 1.0};
  double p = 0;
  CHECK(siclab_power_dbm(iq, 2, &p) == SICLAB_OK);
  CHECK(p == doctest::Approx(0.0));
  const double zeros[2] = {0.0, 0.0};
  CHECK(siclab_power_dbm(zeros, 1, &p) == SICLAB_ERR_INVALID_ARGUMENT);
}

TEST_CASE("C API: train, sweep and model prediction") {
  const auto dir = fs::temp_directory_path() / "siclab_capi";
  fs::remove_all(dir);
  siclab_config* cfg = nullptr;
  REQUIRE(siclab_config_parse("train.epochs = 5\ntrain.sequences = 1\ntrain.sequence_len = 256\n"
                              "sweep.frames = 2\nsweep.snr_step_db = 50\n",
                              &cfg) == SICLAB_OK);
  REQUIRE(siclab_config_set(cfg, "output_dir", dir.string().c_str()) == SICLAB_OK);
  std::vector<std::string> lines;
  auto collect = [](const char* line, void* user) { static_cast<std::vector<std::string>*>(user)->push_back(line); };
  CHECK(siclab_run_train(cfg, "ste,agc", "30", collect, &lines) == SICLAB_OK);
  CHECK(fs::exists(dir / "train_ste_30.csv"));
  CHECK(fs::exists(dir / "train_agc.csv"));
  CHECK_FALSE(fs::exists(dir / "train_bpad_30.csv"));
  CHECK(lines.size() == 3);
  CHECK(siclab_run_train(cfg, "sgd", nullptr, nullptr, nullptr) == SICLAB_ERR_INVALID_ARGUMENT);
  // the default sweep needs every checkpoint
  CHECK(siclab_run_ber(cfg, dir.string().c_str(), nullptr, nullptr) == SICLAB_ERR_IO);
  REQUIRE(siclab_config_set(cfg, "sweep.strategies", "ste, agc") == SICLAB_OK);
  REQUIRE(siclab_config_set(cfg, "sweep.lna_gains_db", "30") == SICLAB_OK);
  CHECK(siclab_run_ber(cfg, dir.string().c_str(), nullptr, nullptr) == SICLAB_OK);
  CHECK(fs::exists(dir / "ber.csv"));

  siclab_model* m = nullptr;
  REQUIRE(siclab_model_load((dir / "model_ste_30.ckpt").string().c_str(), &m) == SICLAB_OK);
  std::vector<double> in(2 * 100), out(2 * 100);
  for (std::size_t i = 0; i < in.size(); ++i) in[i] = std::sin(0.37 * static_cast<double>(i));
  CHECK(siclab_model_predict(m, in.data(), 100, out.data()) == SICLAB_OK);
  double e = 0;
  for (double v : out) e += v * v;
  CHECK(e > 0.0);
  CHECK(siclab_model_predict(m, in.data(), 0, out.data()) == SICLAB_ERR_INVALID_ARGUMENT);
  siclab_model_free(m);
  siclab_config_free(cfg);
  fs::remove_all(dir);
}
