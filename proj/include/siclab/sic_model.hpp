#pragma once

// Global Hammerstein SI model: a sample-wise MLP nonlinearity followed by a
// complex FIR and a fixed output scale. The scale sits below the SI level so
// the taps grow past 1 and an lr-sized Adam step on them stays small against
// the SI; much lower and the taps form too slowly for the MLP to learn.
//
//   c[k] = W2 tanh(W1 [re s, im s, |s|] + b1) + b2      (complex gain, 2 outputs)
//   u[k] = s[k] (1 + c[k])
//   y[k] = output_scale * sum_m f[m] u[k-m]

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "siclab/autodiff.hpp"

namespace siclab::model {

struct ModelShape {
  std::size_t hidden = 16;
  std::size_t fir_len = 64;
  DbmPower output_level{-40.0};
};

class HammersteinModel {
 public:
  HammersteinModel() = default;

  /// Glorot-uniform MLP weights, zero biases, all-zero FIR.
  static HammersteinModel init(std::uint64_t seed, const ModelShape& shape = {});

  /// Builds the forward pass on `tape` with the parameters bound as
  /// trainable leaves.
  ad::CVar forward(ad::Tape& tape, std::span<const cplx> s);
  /// Gradient-free evaluation; values are bit-identical to forward().
  ComplexSequence predict(std::span<const cplx> s) const;

  std::vector<ad::Parameter*> parameters();
  std::vector<const ad::Parameter*> parameters() const;

  const ModelShape& shape() const { return shape_; }
  double output_scale() const { return output_scale_; }

  /// Total number of scalar parameters.
  std::size_t parameter_count() const;

  ad::Parameter w1, b1, w2, b2, fir_re, fir_im;

 private:
  ModelShape shape_;
  double output_scale_ = 0.0;
};

/// Text checkpoint: header, shape, the producing configuration, then each
/// parameter as hex floats so that a save/load cycle is bit-exact.
void save_checkpoint(const std::string& path, const HammersteinModel& m,
                     const std::map<std::string, std::string>& provenance = {});
HammersteinModel load_checkpoint(const std::string& path,
                                 std::map<std::string, std::string>* provenance = nullptr);

std::string to_checkpoint_text(const HammersteinModel& m, const std::map<std::string, std::string>& provenance);
HammersteinModel from_checkpoint_text(const std::string& text, std::map<std::string, std::string>* provenance);

}  // namespace siclab::model
