// Copyright 2026 The mae-codec Authors
// SPDX-License-Identifier: Apache-2.0

#include "mae/training.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "mae/errors.hpp"
#include "mae/image.hpp"

namespace mae {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(trim(cur));
    return out;
}

template <class U>
U parse_number(const std::string& key, const std::string& text)
{
    U v{};
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        throw ContractViolation("config key '" + key + "': cannot parse '" + text + "'");
    }
    return v;
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

bool finite(double v)
{
    return std::isfinite(v);
}

// Flat views over parameters and their tape handles, in visit order.
struct Bound {
    std::vector<Tensor<float>*> params;
    std::vector<Var<float>> vars;
    std::vector<ParamGroup> groups;
    std::vector<bool> trainable;
};

using Trainable = std::function<bool(const std::string&, ParamGroup)>;

Bound bind_all(Tape<float>& tape, Model<float>& model, const Trainable& trainable,
               NetworkSlots<Var<float>>& slots)
{
    slots = bind_params(tape, model.params, trainable);
    Bound b;
    visit_params(model.params, [&](const std::string& name, Tensor<float>& t, ParamGroup g) {
        b.params.push_back(&t);
        b.groups.push_back(g);
        b.trainable.push_back(trainable(name, g));
    });
    visit_params(slots, [&](const std::string&, Var<float>& v, ParamGroup) { b.vars.push_back(v); });
    return b;
}

class Optimizer {
public:
    explicit Optimizer(const Model<float>& model)
    {
        visit_params(model.params, [&](const std::string&, const Tensor<float>& t, ParamGroup) {
            moments_.push_back({Tensor<float>(t.shape()), Tensor<float>(t.shape())});
        });
    }

    void step(Tape<float>& tape, const Bound& b, const std::function<double(ParamGroup)>& lr)
    {
        ++count_;
        for (std::size_t i = 0; i < b.params.size(); ++i) {
            if (!b.trainable[i]) continue;
            adam_update(*b.params[i], tape.grad(b.vars[i]), moments_[i], count_, lr(b.groups[i]));
        }
    }

private:
    std::vector<AdamMoments<float>> moments_;
    std::uint64_t count_ = 0;
};

[[noreturn]] void diverged(std::size_t iteration, double lambda, const RdValues& v)
{
    std::ostringstream msg;
    msg << "non-finite loss at iteration " << iteration << " (lambda " << lambda << "): rate_bpp " << v.rate_bpp
        << ", mse " << v.mse << ", loss " << v.loss;
    throw TrainingDiverged(msg.str());
}

// One Adam step on the mean rd loss of a fresh batch over `lambdas`. Returns
// the terms of each tradeoff in order.
std::vector<RdValues> train_step(Model<float>& model, Optimizer& opt, const Trainable& trainable, const Dataset& data,
                                 const TrainingConfig& cfg, const std::vector<std::size_t>& lambdas,
                                 std::mt19937_64& rng, const std::function<double(ParamGroup)>& lr,
                                 std::size_t iteration)
{
    const Tensor<float> batch = next_batch(data, cfg.crop, cfg.batch, rng);
    const Tensor<float> noise = uniform_noise<float>(latent_shape(model.spec.arch, batch.shape()), rng);
    Tape<float> tape;
    NetworkSlots<Var<float>> slots;
    const Bound b = bind_all(tape, model, trainable, slots);
    const Var<float> x = tape.constant(batch);
    std::vector<RdValues> out;
    Var<float> loss;
    for (std::size_t li : lambdas) {
        RdValues v;
        try {
            const RdTerms<float> t = rd_loss(model.spec, slots, x, li, noise);
            v = {t.loss.value()[0], t.rate_bpp.value()[0], t.mse.value()[0]};
            loss = out.empty() ? t.loss : ad::add(loss, t.loss);
        } catch (const NumericDomainError& e) {
            // A non-finite activation reaches a log before the loss exists.
            std::ostringstream msg;
            msg << "non-finite values at iteration " << iteration << " (lambda " << model.spec.tradeoffs.at(li)
                << "): rate_bpp and mse not computable: " << e.what();
            throw TrainingDiverged(msg.str());
        }
        if (!finite(v.loss) || !finite(v.rate_bpp) || !finite(v.mse)) diverged(iteration, model.spec.tradeoffs.at(li), v);
        out.push_back(v);
    }
    if (lambdas.size() > 1) loss = ad::mul(loss, ad::scalar(tape, 1.0f / static_cast<float>(lambdas.size())));
    tape.backward(loss);
    opt.step(tape, b, lr);
    project_params(model.params);
    return out;
}

// Tradeoffs of one multi-tradeoff step.
std::vector<std::size_t> step_tradeoffs(const TrainingConfig& cfg, const TradeoffSet& set, std::mt19937_64& rng)
{
    if (cfg.objective == TradeoffObjective::sample) return {sample_tradeoff(set, rng)};
    std::vector<std::size_t> all(set.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return all;
}

void report(const TrainingHooks& hooks, const TrainingConfig& cfg, const Checkpoint& ckpt, std::size_t done,
            std::size_t total, const std::vector<IterationLog>& rows)
{
    if (hooks.on_iteration)
        for (const auto& row : rows) hooks.on_iteration(row, ckpt.model);
    if (!hooks.on_checkpoint) return;
    if (done == total || (cfg.checkpoint_every > 0 && done % cfg.checkpoint_every == 0)) hooks.on_checkpoint(ckpt);
}

} // namespace

// --- Config -----------------------------------------------------------------------

std::string to_string(TradeoffObjective o)
{
    return o == TradeoffObjective::sample ? "sample" : "mean";
}

TradeoffObjective parse_tradeoff_objective(const std::string& s)
{
    if (s == "sample") return TradeoffObjective::sample;
    if (s == "mean") return TradeoffObjective::mean;
    throw ContractViolation("objective must be sample or mean, got '" + s + "'");
}

void TrainingConfig::validate() const
{
    if (crop == 0 || crop % spec.arch.downsampling() != 0) {
        throw ContractViolation("crop " + std::to_string(crop) + " must be a positive multiple of " +
                                std::to_string(spec.arch.downsampling()));
    }
    if (batch == 0) throw ContractViolation("batch must be positive");
    if (!(lr > 0.0) || !(entropy_lr > 0.0)) throw ContractViolation("learning rates must be positive");
    if (halving > iterations) throw ContractViolation("halving point exceeds the iteration count");
    if (spec.kind == ModelKind::independent && lambda_index >= spec.tradeoffs.size()) {
        throw ContractViolation("lambda_index " + std::to_string(lambda_index) + " out of range for " +
                                std::to_string(spec.tradeoffs.size()) + " tradeoffs");
    }
    if (spec.arch.channels == 0 || spec.arch.mod_hidden == 0 || spec.arch.stages.empty()) {
        throw ContractViolation("architecture needs channels, hidden units and at least one stage");
    }
}

TrainingConfig parse_config(std::istream& in)
{
    TrainingConfig c;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ContractViolation("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        auto sz = [&] { return parse_number<std::size_t>(key, val); };
        auto dbl = [&] { return parse_number<double>(key, val); };
        if (key == "channels") c.spec.arch.channels = sz();
        else if (key == "mod_hidden") c.spec.arch.mod_hidden = sz();
        else if (key == "stages") {
            c.spec.arch.stages.clear();
            for (const auto& s : split(val, ',')) {
                const auto slash = s.find('/');
                if (slash == std::string::npos) throw ContractViolation("stages: expected kernel/stride, got '" + s + "'");
                c.spec.arch.stages.push_back({parse_number<std::size_t>(key, trim(s.substr(0, slash))),
                                              parse_number<std::size_t>(key, trim(s.substr(slash + 1)))});
            }
        }
        else if (key == "kind") c.spec.kind = parse_model_kind(val);
        else if (key == "objective") c.objective = parse_tradeoff_objective(val);
        else if (key == "lambdas") {
            std::vector<double> l;
            for (const auto& s : split(val, ',')) l.push_back(parse_number<double>(key, s));
            c.spec.tradeoffs = TradeoffSet(l);
        }
        else if (key == "lambda_index") c.lambda_index = sz();
        else if (key == "crop") c.crop = sz();
        else if (key == "batch") c.batch = sz();
        else if (key == "lr") c.lr = dbl();
        else if (key == "entropy_lr") c.entropy_lr = dbl();
        else if (key == "iterations") c.iterations = sz();
        else if (key == "halving") c.halving = sz();
        else if (key == "scale_iterations") c.scale_iterations = sz();
        else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, val);
        else if (key == "checkpoint_every") c.checkpoint_every = sz();
        else throw ContractViolation("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    c.validate();
    return c;
}

TrainingConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open config " + path.string());
    return parse_config(in);
}

std::string format_config(const TrainingConfig& c)
{
    std::ostringstream o;
    o << std::setprecision(17);
    o << "channels = " << c.spec.arch.channels << "\n";
    o << "mod_hidden = " << c.spec.arch.mod_hidden << "\n";
    o << "stages = ";
    for (std::size_t i = 0; i < c.spec.arch.stages.size(); ++i)
        o << (i ? "," : "") << c.spec.arch.stages[i].kernel << "/" << c.spec.arch.stages[i].stride;
    o << "\nkind = " << to_string(c.spec.kind) << "\n";
    o << "objective = " << to_string(c.objective) << "\n";
    o << "lambdas = ";
    for (std::size_t i = 0; i < c.spec.tradeoffs.size(); ++i) o << (i ? "," : "") << c.spec.tradeoffs.at(i);
    o << "\nlambda_index = " << c.lambda_index << "\n";
    o << "crop = " << c.crop << "\nbatch = " << c.batch << "\n";
    o << "lr = " << c.lr << "\nentropy_lr = " << c.entropy_lr << "\n";
    o << "iterations = " << c.iterations << "\nhalving = " << c.halving << "\n";
    o << "scale_iterations = " << c.scale_iterations << "\n";
    o << "seed = " << c.seed << "\ncheckpoint_every = " << c.checkpoint_every << "\n";
    return o.str();
}

ModelSpec trained_spec(const TrainingConfig& c)
{
    ModelSpec s = c.spec;
    if (s.kind == ModelKind::independent) s.tradeoffs = TradeoffSet({c.spec.tradeoffs.at(c.lambda_index)});
    return s;
}

// --- Objective --------------------------------------------------------------------

std::mt19937_64 iteration_rng(std::uint64_t seed, std::uint64_t iteration, std::uint64_t stream)
{
    const std::uint64_t s = splitmix64(splitmix64(splitmix64(seed) ^ iteration) ^ stream);
    return std::mt19937_64(s);
}

std::size_t sample_tradeoff(const TradeoffSet& set, std::mt19937_64& rng)
{
    std::uniform_int_distribution<std::size_t> d(0, set.size() - 1);
    return d(rng);
}

Shape latent_shape(const ArchitectureConfig& arch, const Shape& image_shape)
{
    const std::size_t f = arch.downsampling();
    if (image_shape.size() != 4 || image_shape[2] % f || image_shape[3] % f) {
        throw ContractViolation("image shape " + shape_str(image_shape) + " is not divisible by " + std::to_string(f));
    }
    return {image_shape[0], arch.channels, image_shape[2] / f, image_shape[3] / f};
}

template <class T>
RdTerms<T> rd_loss(const ModelSpec& spec, const NetworkSlots<Var<T>>& p, const Var<T>& x,
                   std::size_t lambda_index, const Tensor<T>& noise)
{
    check_lambda_index(spec, lambda_index);
    Tape<T>& tape = x.tape();
    const Conditioning<T> c = condition(tape, spec.tradeoffs.normalized(lambda_index), p);
    Var<T> z = encode<T>(spec.arch, x, p, c.modulation);
    const bool scaled = spec.kind == ModelKind::bottleneck;
    if (scaled) z = bottleneck_scale_apply(z, p.scales[lambda_index]);
    if (noise.shape() != z.shape()) {
        throw ContractViolation("noise shape " + shape_str(noise.shape()) + " does not match latent " +
                                shape_str(z.shape()));
    }
    const Var<T> z_tilde = ad::add(z, tape.constant(noise));
    const Shape& xs = x.shape();
    const T pixels = static_cast<T>(xs[0] * xs[2] * xs[3]);
    const Var<T> rate = ad::div(rate_bits(z_tilde, p.entropy), ad::scalar(tape, pixels));
    Var<T> y = z_tilde;
    if (scaled) y = bottleneck_scale_invert(y, p.scales[lambda_index]);
    const Var<T> x_hat = decode<T>(spec.arch, y, p, c.demodulation);
    const Var<T> mse = ad::mean(ad::square(ad::sub(x, x_hat)));
    const T lambda = static_cast<T>(spec.tradeoffs.at(lambda_index));
    const Var<T> loss = ad::add(rate, ad::mul(ad::scalar(tape, lambda), mse));
    return {loss, rate, mse};
}

RdValues evaluate_rd(const Model<float>& model, const Tensor<float>& batch, std::size_t lambda_index,
                     const Tensor<float>& noise)
{
    Tape<float> tape;
    const auto p = bind_constants(tape, model.params);
    const auto t = rd_loss(model.spec, p, tape.borrow(batch, false), lambda_index, noise);
    return {t.loss.value()[0], t.rate_bpp.value()[0], t.mse.value()[0]};
}

// --- Optimizer --------------------------------------------------------------------

template <class T>
void adam_update(Tensor<T>& param, const Tensor<T>& grad, AdamMoments<T>& mo, std::uint64_t step, double lr,
                 const AdamConfig& cfg)
{
    if (grad.shape() != param.shape()) {
        throw ContractViolation("gradient shape " + shape_str(grad.shape()) + " does not match parameter " +
                                shape_str(param.shape()));
    }
    if (mo.m.shape() != param.shape()) mo = {Tensor<T>(param.shape()), Tensor<T>(param.shape())};
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double g = grad[i];
        const double m = cfg.beta1 * mo.m[i] + (1.0 - cfg.beta1) * g;
        const double v = cfg.beta2 * mo.v[i] + (1.0 - cfg.beta2) * g * g;
        mo.m[i] = static_cast<T>(m);
        mo.v[i] = static_cast<T>(v);
        param[i] = static_cast<T>(param[i] - lr * (m / c1) / (std::sqrt(v / c2) + cfg.eps));
    }
}

template <class T>
void project_params(NetworkSlots<Tensor<T>>& params)
{
    for (auto* layers : {&params.analysis_gdn, &params.synthesis_gdn})
        for (auto& g : *layers) gdn_project(g);
    for (auto& s : params.scales)
        for (auto& v : s.values()) v = std::max(v, static_cast<T>(kScaleFloor));
}

double learning_rate(const TrainingConfig& c, ParamGroup group, std::size_t iteration)
{
    const double base = group == ParamGroup::entropy || group == ParamGroup::scaling ? c.entropy_lr : c.lr;
    return iteration >= c.halving ? base / 2 : base;
}

// --- Data -------------------------------------------------------------------------

Dataset load_dataset(const std::filesystem::path& dir, std::size_t crop, std::ostream& warn)
{
    if (!std::filesystem::is_directory(dir)) throw ContractViolation("not a directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    Dataset d;
    std::size_t too_small = 0;
    for (const auto& f : files) {
        Tensor<float> img;
        try {
            img = read_image(f);
        } catch (const FormatError& e) {
            warn << "warning: skipping " << e.what() << "\n";
            continue;
        }
        if (img.dim(2) < crop || img.dim(3) < crop) {
            warn << "warning: skipping " << f.string() << ": smaller than the " << crop << "px crop\n";
            ++too_small;
            continue;
        }
        d.images.push_back(std::move(img));
        d.names.push_back(f.filename().string());
    }
    if (d.images.empty()) {
        throw ContractViolation("no usable training images in " + dir.string() +
                                (too_small ? " (all smaller than the crop)" : ""));
    }
    return d;
}

Tensor<float> next_batch(const Dataset& data, std::size_t crop, std::size_t batch, std::mt19937_64& rng)
{
    if (data.images.empty()) throw ContractViolation("empty dataset");
    Tensor<float> out({batch, 3, crop, crop});
    std::uniform_int_distribution<std::size_t> pick(0, data.images.size() - 1);
    for (std::size_t b = 0; b < batch; ++b) {
        const Tensor<float>& img = data.images[pick(rng)];
        const std::size_t h = img.dim(2), w = img.dim(3);
        if (h < crop || w < crop) throw ContractViolation("image smaller than the crop");
        const std::size_t y0 = std::uniform_int_distribution<std::size_t>(0, h - crop)(rng);
        const std::size_t x0 = std::uniform_int_distribution<std::size_t>(0, w - crop)(rng);
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t y = 0; y < crop; ++y) {
                const float* src = img.data() + (c * h + y0 + y) * w + x0;
                std::copy(src, src + crop, out.data() + ((b * 3 + c) * crop + y) * crop);
            }
    }
    return out;
}

// --- Training ---------------------------------------------------------------------

Checkpoint train(const TrainingConfig& config, const Dataset& data, const TrainingHooks& hooks)
{
    config.validate();
    if (config.spec.kind == ModelKind::bottleneck) {
        TrainingConfig phase1 = config;
        phase1.spec.kind = ModelKind::independent;
        phase1.lambda_index = config.spec.tradeoffs.size() - 1;
        const Checkpoint base = train(phase1, data, {hooks.on_iteration, {}});
        return train_bottleneck_scales(base, config, data, hooks);
    }

    Checkpoint ckpt{init_model<float>(trained_spec(config), config.seed), 0};
    Optimizer opt(ckpt.model);
    const Trainable all = [](const std::string&, ParamGroup) { return true; };
    const TradeoffSet& set = ckpt.model.spec.tradeoffs;
    for (std::size_t it = 0; it < config.iterations; ++it) {
        std::mt19937_64 rng = iteration_rng(config.seed, it);
        const std::vector<std::size_t> lis =
            config.spec.kind == ModelKind::mae ? step_tradeoffs(config, set, rng) : std::vector<std::size_t>{0};
        const auto lr = [&](ParamGroup g) { return learning_rate(config, g, it); };
        const std::vector<RdValues> v = train_step(ckpt.model, opt, all, data, config, lis, rng, lr, it);
        ckpt.iteration = it + 1;
        std::vector<IterationLog> rows;
        for (std::size_t k = 0; k < lis.size(); ++k)
            rows.push_back({it + 1, set.at(lis[k]), v[k].rate_bpp, v[k].mse, v[k].loss, lr(ParamGroup::autoencoder)});
        report(hooks, config, ckpt, it + 1, config.iterations, rows);
    }
    if (config.iterations == 0 && hooks.on_checkpoint) hooks.on_checkpoint(ckpt);
    return ckpt;
}

Checkpoint train_bottleneck_scales(const Checkpoint& independent_at_max, const TrainingConfig& config,
                                   const Dataset& data, const TrainingHooks& hooks)
{
    config.validate();
    const Model<float>& base = independent_at_max.model;
    const TradeoffSet& set = config.spec.tradeoffs;
    if (base.spec.kind != ModelKind::independent || base.spec.tradeoffs.size() != 1 ||
        base.spec.tradeoffs.at(0) != set.max() || !(base.spec.arch == config.spec.arch)) {
        throw ContractViolation("bottleneck scaling needs an independent model of the same architecture "
                                "trained at the largest tradeoff");
    }
    ModelSpec spec = config.spec;
    spec.kind = ModelKind::bottleneck;
    Checkpoint ckpt{init_model<float>(spec, config.seed), independent_at_max.iteration};
    // Copy everything the independent model has; scales stay at their unit init.
    std::vector<const Tensor<float>*> src;
    visit_params(base.params, [&](const std::string&, const Tensor<float>& t, ParamGroup) { src.push_back(&t); });
    std::size_t k = 0;
    visit_params(ckpt.model.params, [&](const std::string&, Tensor<float>& t, ParamGroup g) {
        if (g != ParamGroup::scaling) t = *src[k++];
    });

    const std::string fixed_scale = "scale." + std::to_string(set.size() - 1);
    const Trainable trainable = [&](const std::string& name, ParamGroup g) {
        return (g == ParamGroup::entropy || g == ParamGroup::scaling) && name != fixed_scale;
    };
    Optimizer opt(ckpt.model);
    const auto lr = [&](ParamGroup) { return config.entropy_lr; };
    for (std::size_t it = 0; it < config.scale_iterations; ++it) {
        // A separate stream keeps these draws independent of the first phase.
        std::mt19937_64 rng = iteration_rng(config.seed, it, 1);
        const std::vector<std::size_t> lis = step_tradeoffs(config, set, rng);
        const std::vector<RdValues> v = train_step(ckpt.model, opt, trainable, data, config, lis, rng, lr, it);
        ckpt.iteration = independent_at_max.iteration + it + 1;
        std::vector<IterationLog> rows;
        for (std::size_t k = 0; k < lis.size(); ++k)
            rows.push_back({ckpt.iteration, set.at(lis[k]), v[k].rate_bpp, v[k].mse, v[k].loss, config.entropy_lr});
        report(hooks, config, ckpt, it + 1, config.scale_iterations, rows);
    }
    if (config.scale_iterations == 0 && hooks.on_checkpoint) hooks.on_checkpoint(ckpt);
    return ckpt;
}

TrainingLog::TrainingLog(const std::filesystem::path& path)
{
    const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
    out_.open(path, std::ios::app);
    if (!out_) throw FormatError("cannot open training log " + path.string());
    if (fresh) out_ << "iteration,lambda,rate_bpp,mse,loss,lr\n";
}

void TrainingLog::append(const IterationLog& r)
{
    out_ << r.iteration << ',' << r.lambda << ',' << std::setprecision(9) << r.rate_bpp << ',' << r.mse << ','
         << r.loss << ',' << r.lr << '\n';
    out_.flush();
}

template RdTerms<float> rd_loss<float>(const ModelSpec&, const NetworkSlots<Var<float>>&, const Var<float>&,
                                       std::size_t, const Tensor<float>&);
template RdTerms<double> rd_loss<double>(const ModelSpec&, const NetworkSlots<Var<double>>&, const Var<double>&,
                                         std::size_t, const Tensor<double>&);
template void adam_update<float>(Tensor<float>&, const Tensor<float>&, AdamMoments<float>&, std::uint64_t, double,
                                 const AdamConfig&);
template void adam_update<double>(Tensor<double>&, const Tensor<double>&, AdamMoments<double>&, std::uint64_t,
                                  double, const AdamConfig&);
template void project_params<float>(NetworkSlots<Tensor<float>>&);
template void project_params<double>(NetworkSlots<Tensor<double>>&);

} // namespace mae
