// Copyright 2026 The mae-codec Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Every failure ends with exactly one stderr line
//
//   error: <kind>: <message>
//
// and exit status 1; malformed command lines print usage and exit 2.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mae/codec.hpp"
#include "mae/errors.hpp"
#include "mae/image.hpp"
#include "mae/metrics.hpp"
#include "mae/training.hpp"

namespace fs = std::filesystem;
using namespace mae;

namespace {

constexpr int kUsageExit = 2;

struct Options {
    std::string config = "default";
    std::vector<std::string> checkpoints;
    std::vector<std::size_t> lambda_index;
    std::string input;
    std::string output;
    std::string images;
    std::vector<std::size_t> channels;
    std::optional<std::uint64_t> seed;
};

TrainingConfig config_from(const std::string& source)
{
    if (source == "default") return TrainingConfig{};
    return load_config(source);
}

const std::string& single_checkpoint(const Options& o)
{
    if (o.checkpoints.size() != 1) throw ContractViolation("expected exactly one --checkpoint");
    return o.checkpoints[0];
}

std::size_t single_lambda_index(const Options& o, const Model<float>& model)
{
    if (o.lambda_index.size() != 1) throw ContractViolation("expected exactly one --lambda-index");
    check_lambda_index(model.spec, o.lambda_index[0]);
    return o.lambda_index[0];
}

/// Every decodable image in `dir`, sorted by name.
Dataset load_images(const std::string& dir)
{
    return load_dataset(dir, 1, std::cerr);
}

/// --output when given, stdout otherwise.
class Sink {
public:
    explicit Sink(const std::string& path)
    {
        if (path.empty()) return;
        file_ = std::make_unique<std::ofstream>(path);
        if (!*file_) throw FormatError("cannot write " + path);
    }
    std::ostream& get() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

void run_train(const Options& o)
{
    TrainingConfig cfg = config_from(o.config);
    if (o.seed) cfg.seed = *o.seed;
    if (!o.lambda_index.empty()) {
        if (o.lambda_index.size() != 1) throw ContractViolation("expected exactly one --lambda-index");
        cfg.lambda_index = o.lambda_index[0];
    }
    cfg.validate();
    const Dataset data = load_dataset(o.images, cfg.crop, std::cerr);
    std::cerr << "training " << to_string(cfg.spec.kind) << " on " << data.images.size() << " images\n";

    const fs::path out = o.output;
    TrainingHooks hooks;
    hooks.on_iteration = [](const IterationLog& r, const Model<float>&) {
        if (r.iteration % 100 != 0) return;
        std::cerr << "iteration " << r.iteration << " lambda " << r.lambda << " rate_bpp " << r.rate_bpp
                  << " mse " << r.mse << " loss " << r.loss << '\n';
    };
    hooks.on_checkpoint = [&](const Checkpoint& c) { save_checkpoint(out, c); };
    const Checkpoint c = train(cfg, data, hooks);
    save_checkpoint(out, c);
    std::cout << "checkpoint=" << out.string() << " iterations=" << c.iteration << '\n';
}

void run_compress(const Options& o)
{
    const Codec codec = Codec::load(single_checkpoint(o));
    const std::size_t li = single_lambda_index(o, codec.model());
    const Bitstream s = codec.compress(read_image(o.input), li);
    write_bytes(o.output, serialize(s));
    std::cout << "bytes=" << s.total_bytes() << " bpp=" << bits_per_pixel(s) << '\n';
}

void run_decompress(const Options& o)
{
    const Codec codec = Codec::load(single_checkpoint(o));
    const Bitstream s = parse_bitstream(read_bytes(o.input));
    write_image(o.output, codec.decompress(s));
}

void run_evaluate(const Options& o)
{
    const Codec codec = Codec::load(single_checkpoint(o));
    std::vector<std::size_t> indices = o.lambda_index;
    if (indices.empty())
        for (std::size_t i = 0; i < codec.model().spec.tradeoffs.size(); ++i) indices.push_back(i);
    for (std::size_t li : indices) check_lambda_index(codec.model().spec, li);

    const Dataset data = load_images(o.images);
    Sink sink(o.output);
    std::ostream& out = sink.get();
    out << "image,lambda,bpp,psnr_db,msssim_db\n" << std::setprecision(9);
    for (std::size_t li : indices) {
        const double lambda = codec.model().spec.tradeoffs.at(li);
        double bpp = 0, p = 0, m = 0;
        for (std::size_t i = 0; i < data.images.size(); ++i) {
            const Bitstream s = codec.compress(data.images[i], li);
            const Tensor<float> rec = codec.decompress(s);
            const double row_bpp = bits_per_pixel(s), row_p = psnr(data.images[i], rec);
            const double row_m = ms_ssim_db(ms_ssim(data.images[i], rec));
            out << data.names[i] << ',' << lambda << ',' << row_bpp << ',' << row_p << ',' << row_m << '\n';
            bpp += row_bpp;
            p += row_p;
            m += row_m;
        }
        const double n = static_cast<double>(data.images.size());
        out << "mean," << lambda << ',' << bpp / n << ',' << p / n << ',' << m / n << '\n';
    }
}

/// "name=a.ckpt;b.ckpt"
std::pair<std::string, std::vector<std::string>> parse_method(const std::string& arg)
{
    const auto eq = arg.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size()) {
        throw ContractViolation("--checkpoint for rd-curve must look like name=path[;path...], got '" + arg + "'");
    }
    std::vector<std::string> paths;
    std::string rest = arg.substr(eq + 1);
    std::size_t start = 0;
    while (start <= rest.size()) {
        const auto end = std::min(rest.find(';', start), rest.size());
        if (end > start) paths.push_back(rest.substr(start, end - start));
        start = end + 1;
    }
    if (paths.empty()) throw ContractViolation("method '" + arg.substr(0, eq) + "' has no checkpoint");
    return {arg.substr(0, eq), paths};
}

void run_rd_curve(const Options& o)
{
    if (o.checkpoints.empty()) throw ContractViolation("rd-curve needs at least one --checkpoint name=path");
    std::vector<std::unique_ptr<Codec>> codecs;
    std::vector<RdMethod> methods;
    for (const std::string& arg : o.checkpoints) {
        auto [name, paths] = parse_method(arg);
        RdMethod m{name, {}};
        for (const std::string& p : paths) {
            codecs.push_back(std::make_unique<Codec>(Codec::load(p)));
            m.codecs.push_back(codecs.back().get());
        }
        methods.push_back(std::move(m));
    }
    const Dataset data = load_images(o.images);
    const auto rows = rd_curve(methods, data.images);
    Sink sink(o.output);
    write_rd_csv(sink.get(), rows);
}

void run_inspect_ratio(const Options& o)
{
    const Codec codec = Codec::load(single_checkpoint(o));
    const ModelSpec& spec = codec.model().spec;
    std::size_t a = spec.tradeoffs.size() - 1, b = 0;
    if (o.lambda_index.size() == 2) {
        a = o.lambda_index[0];
        b = o.lambda_index[1];
    } else if (!o.lambda_index.empty()) {
        throw ContractViolation("inspect-ratio takes two tradeoff indices: --lambda-index A,B");
    }
    std::vector<std::size_t> channels = o.channels;
    if (channels.empty())
        for (std::size_t c = 0; c < spec.arch.channels; ++c) channels.push_back(c);

    const auto ratios = feature_ratio(codec.model(), read_image(o.input), a, b, channels);
    const fs::path dir = o.output;
    if (!dir.empty()) fs::create_directories(dir);
    std::cout << "channel,min,max,variance,positions\n" << std::setprecision(9);
    for (const ChannelRatio& r : ratios) {
        std::cout << r.channel << ',' << r.min << ',' << r.max << ',' << r.variance << ',' << r.positions << '\n';
        if (!dir.empty()) write_gray_ppm(dir / ("ratio_" + std::to_string(r.channel) + ".ppm"), r.map);
    }
}

void run_param_count(const Options& o)
{
    ModelSpec spec = config_from(o.config).spec;
    const auto print = [](const char* key, std::size_t v) { std::cout << key << '=' << v << '\n'; };
    spec.kind = ModelKind::independent;
    const ParamCount plain = param_count(spec);
    spec.kind = ModelKind::mae;
    const ParamCount mae = param_count(spec);
    print("autoencoder", mae.autoencoder);
    print("entropy_model", mae.entropy_model);
    print("shared", mae.shared());
    print("modulation", mae.modulation);
    print("mae_total", mae.total());
    print("independent_total", plain.total());
    print("independent_set_total", plain.total() * spec.tradeoffs.size());
}

std::string error_kind(const std::exception& e)
{
    if (dynamic_cast<const ContractViolation*>(&e)) return "contract_violation";
    if (dynamic_cast<const NumericDomainError*>(&e)) return "numeric_domain";
    if (dynamic_cast<const CodingError*>(&e)) return "coding";
    if (dynamic_cast<const FormatError*>(&e)) return "format";
    if (dynamic_cast<const RangeError*>(&e)) return "range";
    if (dynamic_cast<const TrainingDiverged*>(&e)) return "training_diverged";
    if (dynamic_cast<const fs::filesystem_error*>(&e)) return "io";
    return "internal";
}

std::string one_line(std::string s)
{
    for (char& c : s)
        if (c == '\n' || c == '\r') c = ' ';
    return s;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Variable-rate learned image codec"};
    app.require_subcommand(1);
    Options o;

    const auto checkpoint = [&](CLI::App* c, const char* help) {
        return c->add_option("--checkpoint", o.checkpoints, help)->required();
    };
    const auto lambda = [&](CLI::App* c, const char* help) {
        return c->add_option("--lambda-index", o.lambda_index, help)->delimiter(',');
    };

    CLI::App* train = app.add_subcommand("train", "Train a model from a config");
    train->add_option("--config", o.config, "key=value file, or 'default'")->required();
    train->add_option("--images", o.images, "Training image directory")->required();
    train->add_option("--output", o.output, "Checkpoint path (rewritten at every save)")->required();
    train->add_option("--seed", o.seed, "Overrides the config seed");
    lambda(train, "Tradeoff index of an independent model");

    CLI::App* compress = app.add_subcommand("compress", "Image to .mae bitstream");
    checkpoint(compress, "Model checkpoint")->expected(1);
    lambda(compress, "Tradeoff index")->required();
    compress->add_option("--input", o.input, "PPM or PNG image")->required();
    compress->add_option("--output", o.output, ".mae path")->required();

    CLI::App* decompress = app.add_subcommand("decompress", ".mae bitstream to image");
    checkpoint(decompress, "Model checkpoint")->expected(1);
    decompress->add_option("--input", o.input, ".mae path")->required();
    decompress->add_option("--output", o.output, "Image path; .png or .ppm")->required();

    CLI::App* evaluate = app.add_subcommand("evaluate", "Per-image rate and quality as CSV");
    checkpoint(evaluate, "Model checkpoint")->expected(1);
    evaluate->add_option("--images", o.images, "Image directory")->required();
    lambda(evaluate, "Tradeoff indices (default: all)");
    evaluate->add_option("--output", o.output, "CSV path (default: stdout)");

    CLI::App* rd = app.add_subcommand("rd-curve", "Rate-distortion points of one or more methods");
    checkpoint(rd, "name=path[;path...], repeatable");
    rd->add_option("--images", o.images, "Image directory")->required();
    rd->add_option("--output", o.output, "CSV path (default: stdout)");

    CLI::App* ratio = app.add_subcommand("inspect-ratio", "Bottleneck ratio maps between two tradeoffs");
    checkpoint(ratio, "Model checkpoint")->expected(1);
    ratio->add_option("--input", o.input, "PPM or PNG image")->required();
    lambda(ratio, "A,B: ratio z(A) / z(B) (default: largest over smallest)")->expected(2);
    ratio->add_option("--channels", o.channels, "Bottleneck channels (default: all)")->delimiter(',');
    ratio->add_option("--output", o.output, "Directory for ratio_<channel>.ppm maps");

    CLI::App* count = app.add_subcommand("param-count", "Parameter counts by component");
    count->add_option("--config", o.config, "key=value file, or 'default'");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsageExit;
    }

    try {
        if (*train) run_train(o);
        else if (*compress) run_compress(o);
        else if (*decompress) run_decompress(o);
        else if (*evaluate) run_evaluate(o);
        else if (*rd) run_rd_curve(o);
        else if (*ratio) run_inspect_ratio(o);
        else if (*count) run_param_count(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << error_kind(e) << ": " << one_line(e.what()) << '\n';
        return 1;
    }
    return 0;
}
