#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qcprobe/network.hpp"
#include "qcprobe/signal.hpp"

namespace qcprobe {

// Per-sample weighting of the reconstruction loss: true = punished (in the
// loss), false = unpunished (zero weight, no gradient).
struct RegionMask {
    std::vector<std::uint8_t> flags;

    static RegionMask all_punished(int n) { return {std::vector<std::uint8_t>(n, 1)}; }
    // Centered contiguous unpunished block of `size` samples.
    static RegionMask centered_unpunished(int n, int size);
    static RegionMask unpunished_span(int n, int start, int len);

    int size() const { return static_cast<int>(flags.size()); }
    int punished_count() const;
    int unpunished_count() const { return size() - punished_count(); }
};

struct TrainConfig {
    int epochs = 300;
    int batch_size = 16;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t seed = 0;
    std::optional<RegionMask> mask; // applied to every record; absent = all-true
};

// loss = sum_i m_i (p_i - t_i)^2 / sum_i m_i, broadcast across channels.
// Gradient is written into pred.grad scaled by grad_scale.
double masked_mse(Tensor& pred, const Tensor& target, const RegionMask& mask,
                  bool with_grad, double grad_scale);

// Standard Adam with bias correction over all trainable parameters.
// Throws on non-finite gradients (naming the parameter).
void adam_step(ParamStore& store, double lr, double beta1, double beta2, double eps,
               std::int64_t t);

struct EpochStats {
    int epoch = 0;
    double punished_mse = 0.0;
    double unpunished_mse = 0.0; // diagnostic only, never used for gradients
};
using TrainingHistory = std::vector<EpochStats>;

// One optimizer step on an explicit (inputs, targets) batch; returns the
// punished-region loss. unpunished_sse/count accumulate the diagnostic.
double train_step(Autoencoder& model, const Batch& inputs, const Batch& targets,
                  const RegionMask& mask, const TrainConfig& cfg,
                  double* unpunished_sse, double* punished_sse);

// Adam on masked MSE with deterministic shuffling; per-epoch punished loss
// plus the unpunished diagnostic. On a non-finite loss or gradient, restores
// the last completed epoch's state and throws. When the mask has no
// unpunished samples the diagnostic mirrors the punished stream.
TrainingHistory train(Autoencoder& model, const std::vector<SignalRecord>& dataset,
                      const TrainConfig& cfg);

// Deterministic 80/20 split by record id.
struct Split {
    std::vector<SignalRecord> train, test;
};
Split split_dataset(const std::vector<SignalRecord>& dataset, double test_frac,
                    std::uint64_t seed);

Batch records_to_batch(const std::vector<SignalRecord>& recs);

// Plain (all-true mask) reconstruction MSE of the model on a record.
double reconstruction_mse(Autoencoder& model, const SignalRecord& rec);

} // namespace qcprobe
