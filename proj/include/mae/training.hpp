// Copyright 2026 The mae-codec Authors
// SPDX-License-Identifier: Apache-2.0
//
// Rate-distortion training for the three model kinds:
//
//   mae          one shared model; each minibatch draws a tradeoff uniformly
//                from the set and takes one Adam step on its loss.
//   independent  a plain autoencoder trained at a single tradeoff.
//   bottleneck   an independent model trained at the largest tradeoff, then
//                frozen while per-tradeoff latent scales (and the shared
//                entropy model) are learned.
//
// Randomness for iteration i comes from a generator keyed by (seed, i), so a
// run is reproducible from its config alone.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "mae/checkpoint.hpp"
#include "mae/network.hpp"

namespace mae {

/// How a multi-tradeoff model picks the tradeoffs of one step.
enum class TradeoffObjective {
    sample,  // one uniformly drawn tradeoff per minibatch
    mean,    // mean loss over every tradeoff, same batch and noise
};

std::string to_string(TradeoffObjective o);
TradeoffObjective parse_tradeoff_objective(const std::string& s);

struct TrainingConfig {
    ModelSpec spec;
    TradeoffObjective objective = TradeoffObjective::sample;
    /// Tradeoff trained by an independent model.
    std::size_t lambda_index = 0;
    std::size_t crop = 48;
    std::size_t batch = 8;
    double lr = 4e-4;
    double entropy_lr = 2e-3;
    std::size_t iterations = 5000;
    /// Both learning rates are halved from this iteration on.
    std::size_t halving = 3000;
    /// Bottleneck second phase: steps spent learning the scales.
    std::size_t scale_iterations = 2000;
    std::uint64_t seed = 1;
    /// Emit a checkpoint through the hook every N iterations (0: only at the end).
    std::size_t checkpoint_every = 0;

    /// Throws ContractViolation on an inconsistent config.
    void validate() const;
};

/// Flat `key = value` lines; '#' starts a comment. Unknown keys are errors.
TrainingConfig parse_config(std::istream& in);
TrainingConfig load_config(const std::filesystem::path& path);
std::string format_config(const TrainingConfig& c);

/// Spec of the model a config produces: an independent model keeps only its
/// own tradeoff.
ModelSpec trained_spec(const TrainingConfig& c);

// --- Objective ----------------------------------------------------------------

std::mt19937_64 iteration_rng(std::uint64_t seed, std::uint64_t iteration, std::uint64_t stream = 0);

/// Uniform index into the tradeoff set.
std::size_t sample_tradeoff(const TradeoffSet& set, std::mt19937_64& rng);

/// [N, C, H/f, W/f] for an [N, 3, H, W] input.
Shape latent_shape(const ArchitectureConfig& arch, const Shape& image_shape);

template <class T>
struct RdTerms {
    Var<T> loss;
    Var<T> rate_bpp;  // bits per pixel of the noisy latent
    Var<T> mse;       // mean squared error on [0, 1] pixels
};

/// rate_bits(z + noise) / (N H W) + lambda * mean((x - x_hat)^2) with the
/// model's conditioning for `lambda_index`. `noise` has latent_shape(x).
template <class T>
RdTerms<T> rd_loss(const ModelSpec& spec, const NetworkSlots<Var<T>>& p, const Var<T>& x,
                   std::size_t lambda_index, const Tensor<T>& noise);

struct RdValues {
    double loss = 0.0;
    double rate_bpp = 0.0;
    double mse = 0.0;
};

/// rd_loss evaluated without gradients.
RdValues evaluate_rd(const Model<float>& model, const Tensor<float>& batch, std::size_t lambda_index,
                     const Tensor<float>& noise);

// --- Optimizer ----------------------------------------------------------------

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

template <class T>
struct AdamMoments {
    Tensor<T> m;
    Tensor<T> v;
};

/// One bias-corrected Adam update of `param`; `step` counts from 1.
template <class T>
void adam_update(Tensor<T>& param, const Tensor<T>& grad, AdamMoments<T>& moments, std::uint64_t step,
                 double lr, const AdamConfig& cfg = {});

inline constexpr double kScaleFloor = 1e-4;

/// GDN positivity and the scale floor.
template <class T>
void project_params(NetworkSlots<Tensor<T>>& params);

/// Learning rate at `iteration` for a parameter group.
double learning_rate(const TrainingConfig& c, ParamGroup group, std::size_t iteration);

// --- Data ---------------------------------------------------------------------

struct Dataset {
    std::vector<Tensor<float>> images;  // each [1, 3, H, W]
    std::vector<std::string> names;
};

/// Loads every decodable image of at least crop x crop pixels, sorted by
/// file name. Other files are skipped with a warning on `warn`; an empty
/// result is a ContractViolation.
Dataset load_dataset(const std::filesystem::path& dir, std::size_t crop, std::ostream& warn);

/// `batch` crops, each from a uniformly chosen image at a uniform position.
Tensor<float> next_batch(const Dataset& data, std::size_t crop, std::size_t batch, std::mt19937_64& rng);

// --- Training -----------------------------------------------------------------

struct IterationLog {
    std::size_t iteration = 0;  // 1-based count of completed steps
    double lambda = 0.0;
    double rate_bpp = 0.0;
    double mse = 0.0;
    double loss = 0.0;
    double lr = 0.0;
};

struct TrainingHooks {
    std::function<void(const IterationLog&, const Model<float>&)> on_iteration;
    std::function<void(const Checkpoint&)> on_checkpoint;
};

/// Runs the procedure for config.spec.kind. Zero iterations return the
/// initialization unchanged. Throws TrainingDiverged on a non-finite loss.
Checkpoint train(const TrainingConfig& config, const Dataset& data, const TrainingHooks& hooks = {});

/// Second bottleneck phase starting from an independent model trained at
/// the largest tradeoff of config.spec.tradeoffs. Autoencoder bytes are untouched.
Checkpoint train_bottleneck_scales(const Checkpoint& independent_at_max, const TrainingConfig& config,
                                   const Dataset& data, const TrainingHooks& hooks = {});

/// Append-only CSV: iteration,lambda,rate_bpp,mse,loss,lr
class TrainingLog {
public:
    explicit TrainingLog(const std::filesystem::path& path);
    void append(const IterationLog& row);

private:
    std::ofstream out_;
};

} // namespace mae
