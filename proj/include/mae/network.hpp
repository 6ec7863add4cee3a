// Copyright 2026 The mae-codec Authors
// SPDX-License-Identifier: Apache-2.0
//
// Shared convolutional autoencoder with tradeoff-conditioned channel
// modulation.
//
// Encoder stage k:  conv (stride-down) -> + bias -> * m_k(lambda) -> GDN
// Decoder stage l:  * d_l(lambda) -> IGDN -> transposed conv -> + bias
//
// m_k and d_l are 1 -> hidden -> C perceptrons with ReLU and exp, fed the
// normalized tradeoff lambda / max(Lambda). The bottleneck-scaling baseline
// instead multiplies the latent by a learned per-tradeoff vector s(lambda)
// before quantization and by 1/s(lambda) before decoding.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mae/entropy.hpp"
#include "mae/gdn.hpp"

namespace mae {

enum class ModelKind : std::uint8_t { mae = 0, independent = 1, bottleneck = 2 };

const char* to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

struct StageSpec {
    std::size_t kernel = 5;
    std::size_t stride = 2;

    bool operator==(const StageSpec&) const = default;
};

struct ArchitectureConfig {
    std::size_t channels = 192;
    std::size_t mod_hidden = 50;
    std::size_t image_channels = 3;
    /// Encoder stages in order; the decoder mirrors them.
    std::vector<StageSpec> stages = {{9, 4}, {5, 2}, {5, 2}};

    std::size_t downsampling() const;
    bool operator==(const ArchitectureConfig&) const = default;
};

/// Ordered, strictly positive set of rate-distortion tradeoffs.
class TradeoffSet {
public:
    TradeoffSet() = default;
    explicit TradeoffSet(std::vector<double> lambdas);

    /// {64, 128, ..., 4096}.
    static TradeoffSet standard();

    const std::vector<double>& lambdas() const noexcept { return lambdas_; }
    std::size_t size() const noexcept { return lambdas_.size(); }
    double at(std::size_t i) const;
    double max() const { return lambdas_.back(); }
    /// lambda_i / max, in (0, 1].
    double normalized(std::size_t i) const { return at(i) / max(); }
    /// Throws ContractViolation when lambda is not a member.
    std::size_t index_of(double lambda) const;

    bool operator==(const TradeoffSet&) const = default;

private:
    std::vector<double> lambdas_;
};

struct ModelSpec {
    ArchitectureConfig arch;
    ModelKind kind = ModelKind::mae;
    TradeoffSet tradeoffs = TradeoffSet::standard();

    bool operator==(const ModelSpec&) const = default;
};

enum class ParamGroup { autoencoder, modulation, entropy, scaling };

template <class Slot>
struct ConvSlots {
    Slot kernel;
    Slot bias;
};

template <class Slot>
struct PerceptronSlots {
    Slot w1;  // [1, hidden]
    Slot b1;  // [hidden]
    Slot w2;  // [hidden, C]
    Slot b2;  // [C]
};

/// Every learnable block of a model. Slot is Shape, Tensor<T> or Var<T>.
template <class Slot>
struct NetworkSlots {
    std::vector<ConvSlots<Slot>> analysis;
    std::vector<GdnSlots<Slot>> analysis_gdn;
    std::vector<GdnSlots<Slot>> synthesis_gdn;
    std::vector<ConvSlots<Slot>> synthesis;
    std::vector<PerceptronSlots<Slot>> modulators;
    std::vector<PerceptronSlots<Slot>> demodulators;
    DensitySlots<Slot> entropy;
    std::vector<Slot> scales;  // bottleneck only, one [C] vector per tradeoff
};

/// Calls fn(name, slot, group) for every block in a fixed order.
template <class Slot, class Fn>
void visit_params(NetworkSlots<Slot>& p, Fn&& fn)
{
    const auto idx = [](std::string prefix, std::size_t i) {
        return prefix + "." + std::to_string(i) + ".";
    };
    for (std::size_t i = 0; i < p.analysis.size(); ++i) {
        fn(idx("enc", i) + "kernel", p.analysis[i].kernel, ParamGroup::autoencoder);
        fn(idx("enc", i) + "bias", p.analysis[i].bias, ParamGroup::autoencoder);
        fn(idx("enc", i) + "gdn.beta", p.analysis_gdn[i].beta, ParamGroup::autoencoder);
        fn(idx("enc", i) + "gdn.gamma", p.analysis_gdn[i].gamma, ParamGroup::autoencoder);
    }
    for (std::size_t i = 0; i < p.synthesis.size(); ++i) {
        fn(idx("dec", i) + "igdn.beta", p.synthesis_gdn[i].beta, ParamGroup::autoencoder);
        fn(idx("dec", i) + "igdn.gamma", p.synthesis_gdn[i].gamma, ParamGroup::autoencoder);
        fn(idx("dec", i) + "kernel", p.synthesis[i].kernel, ParamGroup::autoencoder);
        fn(idx("dec", i) + "bias", p.synthesis[i].bias, ParamGroup::autoencoder);
    }
    auto perceptrons = [&](const char* prefix, auto& nets) {
        for (std::size_t i = 0; i < nets.size(); ++i) {
            fn(idx(prefix, i) + "w1", nets[i].w1, ParamGroup::modulation);
            fn(idx(prefix, i) + "b1", nets[i].b1, ParamGroup::modulation);
            fn(idx(prefix, i) + "w2", nets[i].w2, ParamGroup::modulation);
            fn(idx(prefix, i) + "b2", nets[i].b2, ParamGroup::modulation);
        }
    };
    perceptrons("mod", p.modulators);
    perceptrons("demod", p.demodulators);
    p.entropy.for_each([&](const char* name, Slot& s) {
        fn(std::string("entropy.") + name, s, ParamGroup::entropy);
    });
    for (std::size_t i = 0; i < p.scales.size(); ++i)
        fn("scale." + std::to_string(i), p.scales[i], ParamGroup::scaling);
}

template <class Slot, class Fn>
void visit_params(const NetworkSlots<Slot>& p, Fn&& fn)
{
    visit_params(const_cast<NetworkSlots<Slot>&>(p),
                 [&](const std::string& name, Slot& s, ParamGroup g) {
                     fn(name, static_cast<const Slot&>(s), g);
                 });
}

/// Builds a layout of another slot type with identical structure.
template <class To, class From, class Fn>
NetworkSlots<To> map_params(const NetworkSlots<From>& from, Fn&& fn)
{
    NetworkSlots<To> to;
    to.analysis.resize(from.analysis.size());
    to.analysis_gdn.resize(from.analysis_gdn.size());
    to.synthesis_gdn.resize(from.synthesis_gdn.size());
    to.synthesis.resize(from.synthesis.size());
    to.modulators.resize(from.modulators.size());
    to.demodulators.resize(from.demodulators.size());
    to.scales.resize(from.scales.size());
    std::vector<To*> dst;
    visit_params(to, [&](const std::string&, To& s, ParamGroup) { dst.push_back(&s); });
    std::size_t i = 0;
    visit_params(from, [&](const std::string& name, const From& s, ParamGroup g) {
        *dst[i++] = fn(name, s, g);
    });
    return to;
}

/// Parameter shapes implied by a spec.
NetworkSlots<Shape> param_shapes(const ModelSpec& spec);

template <class T>
struct Model {
    ModelSpec spec;
    NetworkSlots<Tensor<T>> params;
};

/// Fan-in scaled conv kernels, GDN near identity, modulation output layers
/// zero (so every modulation vector starts at exp(0) = 1), unit scales.
template <class T>
Model<T> init_model(const ModelSpec& spec, std::uint64_t seed);

template <class To, class From>
Model<To> cast_model(const Model<From>& m)
{
    return Model<To>{m.spec, map_params<Tensor<To>>(m.params, [](const std::string&,
                                                                 const Tensor<From>& t,
                                                                 ParamGroup) {
                         return t.template cast<To>();
                     })};
}

/// Puts every parameter on the tape; `trainable(name, group)` picks which require gradients.
template <class T, class Pred>
NetworkSlots<Var<T>> bind_params(Tape<T>& tape, const NetworkSlots<Tensor<T>>& params,
                                 Pred&& trainable)
{
    return map_params<Var<T>>(params, [&](const std::string& name, const Tensor<T>& t,
                                          ParamGroup g) {
        return tape.borrow(t, trainable(name, g));
    });
}

template <class T>
NetworkSlots<Var<T>> bind_constants(Tape<T>& tape, const NetworkSlots<Tensor<T>>& params)
{
    return bind_params(tape, params, [](const std::string&, ParamGroup) { return false; });
}

struct ParamCount {
    std::size_t autoencoder = 0;
    std::size_t entropy_model = 0;
    std::size_t modulation = 0;
    std::size_t scaling = 0;

    std::size_t shared() const { return autoencoder + entropy_model; }
    std::size_t total() const { return autoencoder + entropy_model + modulation + scaling; }
};

ParamCount param_count(const ModelSpec& spec);

/// Parameters of one 1 -> hidden -> out perceptron.
std::size_t perceptron_param_count(std::size_t hidden, std::size_t out);

// --- Forward passes ---------------------------------------------------------

/// exp(W2 relu(W1 lambda_hat + b1) + b2) for each network, each of shape [C].
template <class T>
std::vector<Var<T>> modulation_vectors(const Var<T>& lambda_hat,
                                       const std::vector<PerceptronSlots<Var<T>>>& nets);

template <class T>
std::vector<Var<T>> demodulation_vectors(const Var<T>& lambda_hat,
                                         const std::vector<PerceptronSlots<Var<T>>>& nets)
{
    return modulation_vectors(lambda_hat, nets);
}

/// Modulation and demodulation vectors for one tradeoff; empty for
/// unconditioned models.
template <class T>
struct Conditioning {
    std::vector<Var<T>> modulation;
    std::vector<Var<T>> demodulation;
};

/// Throws ContractViolation unless lambda_hat is in (0, 1].
template <class T>
Conditioning<T> condition(Tape<T>& tape, double lambda_hat, const NetworkSlots<Var<T>>& p);

/// x: [N, 3, H, W] with H, W multiples of the downsampling factor.
template <class T>
Var<T> encode(const ArchitectureConfig& arch, const Var<T>& x, const NetworkSlots<Var<T>>& p,
              std::span<const Var<T>> modulation);

/// z_hat: [N, C, h, w] -> [N, 3, h*16, w*16]; not clamped.
template <class T>
Var<T> decode(const ArchitectureConfig& arch, const Var<T>& z_hat, const NetworkSlots<Var<T>>& p,
              std::span<const Var<T>> demodulation);

/// z * s per channel. Throws ContractViolation on a non-positive scale.
template <class T>
Var<T> bottleneck_scale_apply(const Var<T>& z, const Var<T>& s);

/// z_hat * (1 / s) per channel.
template <class T>
Var<T> bottleneck_scale_invert(const Var<T>& z_hat, const Var<T>& s);

// --- Inference helpers ------------------------------------------------------

/// The bottleneck feature that gets quantized: encoder output, times
/// s(lambda) for the bottleneck baseline.
template <class T>
Tensor<T> analyze(const Model<T>& model, const Tensor<T>& x, std::size_t lambda_index);

/// Decoded image from a (dequantized) bottleneck feature, clamped to [0, 1].
template <class T>
Tensor<T> synthesize(const Model<T>& model, const Tensor<T>& y_hat, std::size_t lambda_index);

template <class T>
void clamp_unit(Tensor<T>& x);

/// Validates the index against the model's tradeoff table.
void check_lambda_index(const ModelSpec& spec, std::size_t lambda_index);

} // namespace mae
