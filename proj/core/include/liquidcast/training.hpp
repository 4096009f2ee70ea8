#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "liquidcast/cells.hpp"
#include "liquidcast/sample.hpp"

namespace liquidcast::training {

using cells::ModelParams;

struct TrainConfig {
  double learning_rate{1e-3};
  int batch_size{32};
  int epochs{30};
  double weight_decay{1e-5};  ///< coupled L2, added to the gradient
  double clip_norm{1.0};      ///< global L2 gradient clip
  std::uint64_t seed{0};      ///< shuffling seed; epoch e reshuffles with seed+e
};

/// Adam accumulators mirroring every parameter array.
struct AdamState {
  ModelParams m;  ///< first moments
  ModelParams v;  ///< second moments
  long step{0};
};

[[nodiscard]] AdamState make_adam_state(const ModelParams& p);

/// Mean squared error.
/// @throws Error{EmptyBatch}    when the spans are empty.
/// @throws Error{ShapeMismatch} when lengths differ.
[[nodiscard]] double mse_loss(std::span<const double> predictions,
                              std::span<const double> targets);

struct GradResult {
  ModelParams grads;  ///< same layout as the parameters
  double loss{0.0};   ///< batch MSE at the current parameters
};

/// Gradient of the batch MSE with respect to every parameter, computed by a
/// reverse pass through the unrolled window recurrences.
///
/// @throws Error{EmptyBatch}       when the batch is empty.
/// @throws Error{NonFiniteForward} when a prediction or the loss is not finite.
[[nodiscard]] GradResult grad(const ModelParams& p,
                              std::span<const SequenceSample> samples,
                              std::span<const std::size_t> batch_indices);
[[nodiscard]] GradResult grad(const ModelParams& p,
                              std::span<const SequenceSample> batch);

/// Global L2 norm across every array of a parameter-shaped container.
[[nodiscard]] double global_norm(const ModelParams& g);

/// Scales all arrays so the global L2 norm does not exceed max_norm
/// (no-op when already within). Returns the pre-clip norm.
double clip_gradients(ModelParams& g, double max_norm);

/// One optimizer step: couples weight decay into the gradient (g += wd * p),
/// clips the coupled gradient to cfg.clip_norm, then applies Adam
/// (beta1 = 0.9, beta2 = 0.999, eps = 1e-8, bias-corrected).
void adam_step(ModelParams& p, AdamState& state, ModelParams g,
               const TrainConfig& cfg);

/// Deterministic sample order for one epoch: a Fisher-Yates shuffle of
/// 0..n-1 seeded with seed + epoch.
[[nodiscard]] std::vector<std::size_t> epoch_order(std::size_t n,
                                                   std::uint64_t seed,
                                                   int epoch);

struct EpochStats {
  int epoch{0};
  double mean_loss{0.0};  ///< NaN when every batch in the epoch was skipped
  int batches{0};
  int batches_skipped{0};
};

/// Consumes `order` in consecutive chunks of cfg.batch_size (the final chunk
/// may be short) and applies one optimizer step per usable batch. A batch is
/// silently skipped — parameters and optimizer state untouched — when its
/// inputs, its predictions, or its loss are not finite.
[[nodiscard]] EpochStats run_epoch(ModelParams& p, AdamState& state,
                                   std::span<const SequenceSample> samples,
                                   std::span<const std::size_t> order,
                                   const TrainConfig& cfg, int epoch_index = 0);

struct TrainResult {
  ModelParams params;
  std::vector<EpochStats> trace;  ///< one row per epoch
};

/// Full training loop: cfg.epochs epochs, each over a fresh shuffle of the
/// samples. Deterministic in (initial parameters, samples, cfg).
///
/// @throws Error{EmptyBatch}        when samples is empty and epochs > 0.
/// @throws Error{AllBatchesSkipped} when at least one batch was attempted and
///                                  none was usable across the entire run.
[[nodiscard]] TrainResult train(ModelParams p,
                                std::span<const SequenceSample> samples,
                                const TrainConfig& cfg);

}  // namespace liquidcast::training
