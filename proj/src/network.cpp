// Copyright 2026 The mae-codec Authors
// SPDX-License-Identifier: Apache-2.0

#include "mae/network.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace mae {

const char* to_string(ModelKind kind)
{
    switch (kind) {
    case ModelKind::mae: return "mae";
    case ModelKind::independent: return "independent";
    case ModelKind::bottleneck: return "bottleneck";
    }
    return "unknown";
}

ModelKind parse_model_kind(const std::string& name)
{
    if (name == "mae") return ModelKind::mae;
    if (name == "independent") return ModelKind::independent;
    if (name == "bottleneck") return ModelKind::bottleneck;
    throw ContractViolation("unknown model kind '" + name + "'");
}

std::size_t ArchitectureConfig::downsampling() const
{
    std::size_t f = 1;
    for (const auto& s : stages) f *= s.stride;
    return f;
}

TradeoffSet::TradeoffSet(std::vector<double> lambdas) : lambdas_(std::move(lambdas))
{
    if (lambdas_.empty()) throw ContractViolation("tradeoff set is empty");
    for (std::size_t i = 0; i < lambdas_.size(); ++i) {
        if (!(lambdas_[i] > 0.0) || !std::isfinite(lambdas_[i])) {
            throw ContractViolation("tradeoffs must be finite and positive");
        }
        if (i && !(lambdas_[i] > lambdas_[i - 1])) {
            throw ContractViolation("tradeoffs must be strictly increasing");
        }
    }
}

TradeoffSet TradeoffSet::standard()
{
    return TradeoffSet({64, 128, 256, 512, 1024, 2048, 4096});
}

double TradeoffSet::at(std::size_t i) const
{
    if (i >= lambdas_.size()) {
        throw ContractViolation("tradeoff index " + std::to_string(i) + " out of range for " +
                                std::to_string(lambdas_.size()) + " tradeoffs");
    }
    return lambdas_[i];
}

std::size_t TradeoffSet::index_of(double lambda) const
{
    for (std::size_t i = 0; i < lambdas_.size(); ++i)
        if (lambdas_[i] == lambda) return i;
    throw ContractViolation("lambda " + std::to_string(lambda) + " is not a trained tradeoff");
}

void check_lambda_index(const ModelSpec& spec, std::size_t lambda_index)
{
    (void)spec.tradeoffs.at(lambda_index);
}

// ---------------------------------------------------------------------------

namespace {

std::size_t stage_pad(const StageSpec& s)
{
    return s.kernel / 2;
}

std::size_t stage_output_pad(const StageSpec& s)
{
    const std::size_t op = s.stride + 2 * stage_pad(s) - s.kernel;
    if (op >= s.stride) throw ContractViolation("stage geometry cannot invert its stride");
    return op;
}

} // namespace

NetworkSlots<Shape> param_shapes(const ModelSpec& spec)
{
    const auto& a = spec.arch;
    const std::size_t n = a.channels;
    const std::size_t k = a.stages.size();
    NetworkSlots<Shape> s;
    std::size_t in = a.image_channels;
    for (const auto& st : a.stages) {
        s.analysis.push_back({Shape{n, in, st.kernel, st.kernel}, Shape{n}});
        s.analysis_gdn.push_back({Shape{n}, Shape{n, n}});
        in = n;
    }
    for (std::size_t l = 0; l < k; ++l) {
        const StageSpec& st = a.stages[k - 1 - l];
        const std::size_t out = l + 1 == k ? a.image_channels : n;
        s.synthesis_gdn.push_back({Shape{n}, Shape{n, n}});
        s.synthesis.push_back({Shape{n, out, st.kernel, st.kernel}, Shape{out}});
    }
    if (spec.kind == ModelKind::mae) {
        const PerceptronSlots<Shape> net{Shape{1, a.mod_hidden}, Shape{a.mod_hidden},
                                         Shape{a.mod_hidden, n}, Shape{n}};
        s.modulators.assign(k, net);
        s.demodulators.assign(k, net);
    }
    s.entropy = {Shape{n, 3}, Shape{n, 3, 3}, Shape{n, 3}, Shape{n, 3},
                 Shape{n, 3}, Shape{n},       Shape{n, 3}, Shape{n, 3}};
    if (spec.kind == ModelKind::bottleneck) s.scales.assign(spec.tradeoffs.size(), Shape{n});
    return s;
}

std::size_t perceptron_param_count(std::size_t hidden, std::size_t out)
{
    return (1 * hidden + hidden) + (hidden * out + out);
}

ParamCount param_count(const ModelSpec& spec)
{
    ParamCount c;
    visit_params(param_shapes(spec), [&](const std::string&, const Shape& s, ParamGroup g) {
        const std::size_t n = shape_size(s);
        switch (g) {
        case ParamGroup::autoencoder: c.autoencoder += n; break;
        case ParamGroup::modulation: c.modulation += n; break;
        case ParamGroup::entropy: c.entropy_model += n; break;
        case ParamGroup::scaling: c.scaling += n; break;
        }
    });
    return c;
}

template <class T>
Model<T> init_model(const ModelSpec& spec, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto shapes = param_shapes(spec);
    Model<T> m{spec, map_params<Tensor<T>>(shapes, [](const std::string&, const Shape& s,
                                                      ParamGroup) { return Tensor<T>(s); })};
    auto& p = m.params;
    const auto& stages = spec.arch.stages;
    const std::size_t k = stages.size();

    auto fill_normal = [&](Tensor<T>& t, double sd) {
        for (auto& v : t.values()) v = static_cast<T>(normal(rng) * sd);
    };
    for (std::size_t i = 0; i < k; ++i) {
        const Shape& ks = p.analysis[i].kernel.shape();
        fill_normal(p.analysis[i].kernel, 1.0 / std::sqrt(static_cast<double>(ks[1] * ks[2] * ks[3])));
        p.analysis_gdn[i] = gdn_init<T>(spec.arch.channels);
    }
    for (std::size_t l = 0; l < k; ++l) {
        const Shape& ks = p.synthesis[l].kernel.shape();
        const double stride = static_cast<double>(stages[k - 1 - l].stride);
        const double fan_in = static_cast<double>(ks[0] * ks[2] * ks[3]) / (stride * stride);
        fill_normal(p.synthesis[l].kernel, 1.0 / std::sqrt(fan_in));
        p.synthesis_gdn[l] = gdn_init<T>(spec.arch.channels);
    }
    for (auto* nets : {&p.modulators, &p.demodulators}) {
        for (auto& net : *nets) {
            fill_normal(net.w1, 1.0);
            net.b1.fill(T(0.1));
        }
    }
    p.entropy = density_init<T>(spec.arch.channels, rng);
    for (auto& s : p.scales) s.fill(T(1));
    return m;
}

// ---------------------------------------------------------------------------

template <class T>
std::vector<Var<T>> modulation_vectors(const Var<T>& lambda_hat,
                                       const std::vector<PerceptronSlots<Var<T>>>& nets)
{
    const T lh = lambda_hat.value()[0];
    if (lambda_hat.value().size() != 1 || !(lh > T(0)) || lh > T(1)) {
        throw ContractViolation("normalized tradeoff must be a scalar in (0, 1]");
    }
    const Var<T> input = ad::reshape(lambda_hat, Shape{1, 1});
    std::vector<Var<T>> out;
    out.reserve(nets.size());
    for (const auto& net : nets) {
        const Var<T> hidden = ad::relu(ad::affine(input, net.w1, net.b1));
        const Var<T> logits = ad::affine(hidden, net.w2, net.b2);
        out.push_back(ad::reshape(ad::exp(logits), Shape{net.b2.value().size()}));
    }
    return out;
}

template <class T>
Conditioning<T> condition(Tape<T>& tape, double lambda_hat, const NetworkSlots<Var<T>>& p)
{
    if (!(lambda_hat > 0.0) || lambda_hat > 1.0) {
        throw ContractViolation("normalized tradeoff " + std::to_string(lambda_hat) +
                                " outside (0, 1]");
    }
    Conditioning<T> c;
    if (p.modulators.empty() && p.demodulators.empty()) return c;
    const Var<T> lh = ad::scalar(tape, static_cast<T>(lambda_hat));
    c.modulation = modulation_vectors(lh, p.modulators);
    c.demodulation = demodulation_vectors(lh, p.demodulators);
    return c;
}

template <class T>
Var<T> encode(const ArchitectureConfig& arch, const Var<T>& x, const NetworkSlots<Var<T>>& p,
              std::span<const Var<T>> modulation)
{
    const Shape& xs = x.shape();
    const std::size_t f = arch.downsampling();
    if (xs.size() != 4 || xs[1] != arch.image_channels || xs[2] % f || xs[3] % f || xs[2] == 0 ||
        xs[3] == 0) {
        throw ContractViolation("encode expects [N, " + std::to_string(arch.image_channels) +
                                ", H, W] with sides multiples of " + std::to_string(f) +
                                ", got " + shape_str(xs));
    }
    if (!modulation.empty() && modulation.size() != arch.stages.size()) {
        throw ContractViolation("encoder has " + std::to_string(arch.stages.size()) +
                                " modulated sites but got " + std::to_string(modulation.size()) +
                                " vectors");
    }
    Var<T> h = x;
    for (std::size_t k = 0; k < arch.stages.size(); ++k) {
        const StageSpec& st = arch.stages[k];
        h = ad::conv2d(h, p.analysis[k].kernel, st.stride, stage_pad(st));
        h = ad::channel_bias(h, p.analysis[k].bias);
        if (!modulation.empty()) h = ad::channel_scale(h, modulation[k]);
        h = gdn_forward(h, p.analysis_gdn[k]);
    }
    return h;
}

template <class T>
Var<T> decode(const ArchitectureConfig& arch, const Var<T>& z_hat, const NetworkSlots<Var<T>>& p,
              std::span<const Var<T>> demodulation)
{
    const Shape& zs = z_hat.shape();
    if (zs.size() != 4 || zs[1] != arch.channels || zs[2] == 0 || zs[3] == 0) {
        throw ContractViolation("decode expects [N, " + std::to_string(arch.channels) +
                                ", h, w], got " + shape_str(zs));
    }
    const std::size_t k = arch.stages.size();
    if (!demodulation.empty() && demodulation.size() != k) {
        throw ContractViolation("decoder has " + std::to_string(k) + " demodulated sites but got " +
                                std::to_string(demodulation.size()) + " vectors");
    }
    Var<T> h = z_hat;
    for (std::size_t l = 0; l < k; ++l) {
        const StageSpec& st = arch.stages[k - 1 - l];
        if (!demodulation.empty()) h = ad::channel_scale(h, demodulation[l]);
        h = igdn_forward(h, p.synthesis_gdn[l]);
        h = ad::conv2d_transpose(h, p.synthesis[l].kernel, st.stride, stage_pad(st),
                                 stage_output_pad(st));
        h = ad::channel_bias(h, p.synthesis[l].bias);
    }
    return h;
}

template <class T>
Var<T> bottleneck_scale_apply(const Var<T>& z, const Var<T>& s)
{
    for (std::size_t i = 0; i < s.value().size(); ++i) {
        if (!(s.value()[i] > T(0))) {
            throw ContractViolation("bottleneck scale element " + std::to_string(i) +
                                    " is not positive");
        }
    }
    return ad::channel_scale(z, s);
}

template <class T>
Var<T> bottleneck_scale_invert(const Var<T>& z_hat, const Var<T>& s)
{
    for (std::size_t i = 0; i < s.value().size(); ++i) {
        if (!(s.value()[i] > T(0))) {
            throw ContractViolation("bottleneck scale element " + std::to_string(i) +
                                    " is not positive");
        }
    }
    const Var<T> one = ad::scalar(z_hat.tape(), T(1));
    return ad::channel_scale(z_hat, ad::div(one, s));
}

template <class T>
Tensor<T> analyze(const Model<T>& model, const Tensor<T>& x, std::size_t lambda_index)
{
    check_lambda_index(model.spec, lambda_index);
    Tape<T> tape;
    const auto p = bind_constants(tape, model.params);
    const auto c = condition(tape, model.spec.tradeoffs.normalized(lambda_index), p);
    Var<T> z = encode<T>(model.spec.arch, tape.borrow(x, false), p, c.modulation);
    if (model.spec.kind == ModelKind::bottleneck) z = bottleneck_scale_apply(z, p.scales[lambda_index]);
    return z.value();
}

template <class T>
Tensor<T> synthesize(const Model<T>& model, const Tensor<T>& y_hat, std::size_t lambda_index)
{
    check_lambda_index(model.spec, lambda_index);
    Tape<T> tape;
    const auto p = bind_constants(tape, model.params);
    const auto c = condition(tape, model.spec.tradeoffs.normalized(lambda_index), p);
    Var<T> z = tape.borrow(y_hat, false);
    if (model.spec.kind == ModelKind::bottleneck) z = bottleneck_scale_invert(z, p.scales[lambda_index]);
    Tensor<T> x = decode<T>(model.spec.arch, z, p, c.demodulation).value();
    clamp_unit(x);
    return x;
}

template <class T>
void clamp_unit(Tensor<T>& x)
{
    for (auto& v : x.values()) v = std::clamp(v, T(0), T(1));
}

#define MAE_INSTANTIATE(T)                                                                       \
    template Model<T> init_model<T>(const ModelSpec&, std::uint64_t);                            \
    template std::vector<Var<T>> modulation_vectors<T>(const Var<T>&,                            \
                                                       const std::vector<PerceptronSlots<Var<T>>>&); \
    template Conditioning<T> condition<T>(Tape<T>&, double, const NetworkSlots<Var<T>>&);        \
    template Var<T> encode<T>(const ArchitectureConfig&, const Var<T>&,                          \
                              const NetworkSlots<Var<T>>&, std::span<const Var<T>>);             \
    template Var<T> decode<T>(const ArchitectureConfig&, const Var<T>&,                          \
                              const NetworkSlots<Var<T>>&, std::span<const Var<T>>);             \
    template Var<T> bottleneck_scale_apply<T>(const Var<T>&, const Var<T>&);                     \
    template Var<T> bottleneck_scale_invert<T>(const Var<T>&, const Var<T>&);                    \
    template Tensor<T> analyze<T>(const Model<T>&, const Tensor<T>&, std::size_t);               \
    template Tensor<T> synthesize<T>(const Model<T>&, const Tensor<T>&, std::size_t);            \
    template void clamp_unit<T>(Tensor<T>&);

MAE_INSTANTIATE(float)
MAE_INSTANTIATE(double)
#undef MAE_INSTANTIATE

} // namespace mae
