// sic-lab: command-line front end over the siclab C API.

#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "siclab/siclab.h"

namespace {

void print_line(const char* line, void*) {
  std::printf("%s\n", line);
  std::fflush(stdout);
}

int fail(siclab_status st) {
  std::fprintf(stderr, "sic-lab: %s: %s\n", siclab_status_string(st), siclab_last_error());
  return static_cast<int>(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Full-duplex SIC learning and BER experiments"};
  app.require_subcommand(1);

  std::string config_path, strategies, gains, models_dir;

  auto* train = app.add_subcommand("train", "train SIC models and write learning curves");
  train->add_option("--config", config_path, "config file")->required()->check(CLI::ExistingFile);
  train->add_option("--strategies", strategies, "comma-separated subset of bpad,ste,agc,dta");
  train->add_option("--gains", gains, "comma-separated LNA gains in dB for bpad/ste");

  auto* ber = app.add_subcommand("ber", "BER/SINR sweep over trained checkpoints");
  ber->add_option("--config", config_path, "config file")->required()->check(CLI::ExistingFile);
  ber->add_option("--models", models_dir, "directory holding model_<run>.ckpt")->required()->check(CLI::ExistingDirectory);

  auto* all = app.add_subcommand("all", "train, then sweep");
  all->add_option("--config", config_path, "config file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  siclab_config* cfg = nullptr;
  if (auto st = siclab_config_load(config_path.c_str(), &cfg); st != SICLAB_OK) return fail(st);

  siclab_status st = SICLAB_OK;
  if (train->parsed()) {
    st = siclab_run_train(cfg, strategies.c_str(), gains.c_str(), print_line, nullptr);
  } else if (ber->parsed()) {
    st = siclab_run_ber(cfg, models_dir.c_str(), print_line, nullptr);
  } else {
    st = siclab_run_all(cfg, print_line, nullptr);
  }
  siclab_config_free(cfg);
  return st == SICLAB_OK ? 0 : fail(st);
}
