#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bisense/energy.hpp"

namespace bisense {

// Non-owning view of one detector input tensor (row-major float32).
struct FeatureView {
  const float* data = nullptr;
  int rows = 0;
  int cols = 0;
};

// Labelled sample collection used by training and evaluation.
struct LabeledSet {
  std::vector<FeatureView> x;
  std::vector<int> y;
  std::size_t size() const { return x.size(); }
};

enum class InputKind { grid2d, sequence1d };

// Fixed detector family: conv(8) -> pool -> conv(16) -> pool -> dense(32) ->
// dense(1).  grid2d inputs use 3x3 kernels with 2x2 pooling over
// delay x Doppler maps; sequence1d inputs use width-5 kernels with width-2
// pooling over delay profiles.  All convolutions are valid (no padding).
struct CnnConfig {
  InputKind kind = InputKind::grid2d;
  int input_rows = 128;  // delay bins
  int input_cols = 128;  // Doppler bins (1 for sequence1d)

  void validate() const;
  static CnnConfig for_moving();      // 128 x 128 delay-Doppler input
  static CnnConfig for_stationary();  // 128-bin delay profile input
};

struct TrainHyperparams {
  double learning_rate = 1e-3;  // Adam
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 32;
  int max_epochs = 30;
  int patience = 5;  // epochs without a new best validation accuracy
};

class CnnModel {
 public:
  // He-uniform weights, zero biases, drawn from a dedicated stream of seed.
  static CnnModel init(const CnnConfig& cfg, std::uint64_t seed);

  const CnnConfig& config() const { return cfg_; }
  std::uint64_t init_seed() const { return init_seed_; }
  int param_count() const { return static_cast<int>(params_.size()); }
  std::vector<float>& params() { return params_; }
  const std::vector<float>& params() const { return params_; }

  // Optional per-element affine input transform applied before the first
  // convolution: z = (x - mean) * scale.  Training fits it to the training
  // set; without it the class signal in a profile can sit orders of
  // magnitude below the fixed propagation background and starve every
  // gradient.  Empty vectors mean identity.
  bool has_input_scaling() const { return !in_mean_.empty(); }
  const std::vector<float>& input_mean() const { return in_mean_; }
  const std::vector<float>& input_scale() const { return in_scale_; }
  // Both vectors sized to the input element count (ShapeError otherwise);
  // scale entries must be finite and positive (DomainError).
  void set_input_scaling(std::vector<float> mean, std::vector<float> scale);
  void clear_input_scaling();

  double prob(const FeatureView& x) const;
  Prediction predict(const FeatureView& x) const;

  // Checkpoint: <dir>/manifest.json + <dir>/params.bin (little-endian
  // float32 in parameter-table order) + <dir>/scaling.bin (input mean then
  // scale) when input scaling is present.
  void save(const std::string& dir) const;
  static CnnModel load(const std::string& dir);

 private:
  CnnModel() = default;
  CnnConfig cfg_;
  std::uint64_t init_seed_ = 0;
  std::vector<float> params_;
  std::vector<float> in_mean_, in_scale_;
};

struct TrainReport {
  int epochs_run = 0;
  int best_epoch = -1;             // epoch index of the restored weights
  double best_val_accuracy = 0.0;
  std::vector<double> train_loss;  // mean BCE per epoch
  std::vector<double> val_accuracy;
};

// Mini-batch Adam on binary cross-entropy.  First fits the model's input
// scaling to the training set (per-element mean and spread, spreads floored
// at 1e-3 of the largest), then optimizes.  Per-sample gradients are
// computed in parallel into per-sample buffers and reduced in sample order,
// so the trained weights are bit-identical for any num_threads.  Early stop:
// no new best validation accuracy for `patience` epochs; the best-epoch
// weights are restored on return.  Throws DivergenceError (model left at the
// last finite-loss epoch) if the loss goes non-finite.
TrainReport train_cnn(CnnModel& model, const LabeledSet& train,
                      const LabeledSet& val, const TrainHyperparams& hp,
                      std::uint64_t seed, int num_threads);

// Binary cross-entropy loss and its full analytic parameter gradient for one
// sample, computed in double precision (the float32 parameters are exactly
// representable there).  Gradient entries follow parameter-table order.
std::pair<double, std::vector<double>> cnn_loss_gradient(
    const CnnModel& model, const FeatureView& x, int label);

// Central-difference check of the analytic gradient, run in double
// precision: samples up to per_layer parameters from every weight/bias
// table, perturbs by +-step, and returns the maximum relative error
// |analytic - numeric| / max(|analytic|, |numeric|, 1e-6).
double max_gradient_error(const CnnModel& model, const FeatureView& x,
                          int label, int per_layer, double step,
                          std::uint64_t seed);

}  // namespace bisense
