// Copyright 2026 The mae-codec Authors
// SPDX-License-Identifier: Apache-2.0

#include "mae/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "mae/errors.hpp"
#include "mae/range_coder.hpp"

namespace mae {

namespace {

constexpr char kMagic[8] = {'M', 'A', 'E', 'C', 'K', 'P', 'T', '\0'};

class Writer {
public:
    template <class U>
    void le(U v)
    {
        for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f32(float v) { le(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }
    void raw(const void* p, std::size_t n)
    {
        const auto* b = static_cast<const std::uint8_t*>(p);
        out.insert(out.end(), b, b + n);
    }

    std::vector<std::uint8_t> out;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> b) : bytes(b) {}

    template <class U>
    U le()
    {
        need(sizeof(U));
        U v = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<U>(bytes[pos + i]) << (8 * i));
        pos += sizeof(U);
        return v;
    }
    float f32() { return std::bit_cast<float>(le<std::uint32_t>()); }
    double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }
    std::string str(std::size_t n)
    {
        need(n);
        std::string s(reinterpret_cast<const char*>(bytes.data() + pos), n);
        pos += n;
        return s;
    }
    void need(std::size_t n) const
    {
        if (bytes.size() - pos < n) {
            throw FormatError("checkpoint truncated at byte " + std::to_string(pos));
        }
    }

    std::span<const std::uint8_t> bytes;
    std::size_t pos = 0;
};

} // namespace

bool Checkpoint::operator==(const Checkpoint& o) const
{
    return serialize_checkpoint(*this) == serialize_checkpoint(o);
}

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& c)
{
    const ModelSpec& spec = c.model.spec;
    Writer w;
    w.raw(kMagic, sizeof(kMagic));
    w.le<std::uint32_t>(kCheckpointVersion);
    w.le<std::uint8_t>(static_cast<std::uint8_t>(spec.kind));
    w.le<std::uint32_t>(static_cast<std::uint32_t>(spec.arch.channels));
    w.le<std::uint32_t>(static_cast<std::uint32_t>(spec.arch.mod_hidden));
    w.le<std::uint32_t>(static_cast<std::uint32_t>(spec.arch.image_channels));
    w.le<std::uint32_t>(static_cast<std::uint32_t>(spec.arch.stages.size()));
    for (const auto& s : spec.arch.stages) {
        w.le<std::uint32_t>(static_cast<std::uint32_t>(s.kernel));
        w.le<std::uint32_t>(static_cast<std::uint32_t>(s.stride));
    }
    w.le<std::uint64_t>(c.iteration);
    w.le<std::uint32_t>(static_cast<std::uint32_t>(spec.tradeoffs.size()));
    for (double l : spec.tradeoffs.lambdas()) w.f64(l);

    std::uint32_t blocks = 0;
    visit_params(c.model.params, [&](const std::string&, const Tensor<float>&, ParamGroup) { ++blocks; });
    w.le<std::uint32_t>(blocks);
    visit_params(c.model.params, [&](const std::string& name, const Tensor<float>& t, ParamGroup) {
        w.le<std::uint16_t>(static_cast<std::uint16_t>(name.size()));
        w.raw(name.data(), name.size());
        w.le<std::uint8_t>(static_cast<std::uint8_t>(t.rank()));
        for (std::size_t d : t.shape()) w.le<std::uint32_t>(static_cast<std::uint32_t>(d));
        for (float v : t.values()) w.f32(v);
    });
    return std::move(w.out);
}

Checkpoint parse_checkpoint(std::span<const std::uint8_t> bytes)
{
    Reader r(bytes);
    if (r.str(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) {
        throw FormatError("not a checkpoint file (bad magic)");
    }
    const auto version = r.le<std::uint32_t>();
    if (version != kCheckpointVersion) {
        throw FormatError("unsupported checkpoint version " + std::to_string(version));
    }
    const auto kind = r.le<std::uint8_t>();
    if (kind > static_cast<std::uint8_t>(ModelKind::bottleneck)) {
        throw FormatError("unknown model kind " + std::to_string(kind) + " in checkpoint");
    }
    Checkpoint c;
    ModelSpec& spec = c.model.spec;
    spec.kind = static_cast<ModelKind>(kind);
    spec.arch.channels = r.le<std::uint32_t>();
    spec.arch.mod_hidden = r.le<std::uint32_t>();
    spec.arch.image_channels = r.le<std::uint32_t>();
    const auto stages = r.le<std::uint32_t>();
    if (stages == 0 || stages > 16) throw FormatError("implausible stage count " + std::to_string(stages));
    spec.arch.stages.clear();
    for (std::uint32_t i = 0; i < stages; ++i) {
        StageSpec s;
        s.kernel = r.le<std::uint32_t>();
        s.stride = r.le<std::uint32_t>();
        spec.arch.stages.push_back(s);
    }
    const auto& a = spec.arch;
    bool plausible = a.channels >= 1 && a.channels <= 4096 && a.mod_hidden >= 1 && a.mod_hidden <= 4096 &&
                     a.image_channels == 3;
    for (const auto& s : a.stages) plausible = plausible && s.kernel >= 1 && s.kernel <= 64 && s.stride >= 1 && s.stride <= s.kernel;
    if (!plausible) throw FormatError("implausible architecture in checkpoint header");
    c.iteration = r.le<std::uint64_t>();
    const auto n_lambda = r.le<std::uint32_t>();
    if (n_lambda == 0 || n_lambda > 256) throw FormatError("implausible tradeoff count " + std::to_string(n_lambda));
    std::vector<double> lambdas(n_lambda);
    for (auto& l : lambdas) l = r.f64();
    try {
        spec.tradeoffs = TradeoffSet(lambdas);
    } catch (const ContractViolation& e) {
        throw FormatError(std::string("checkpoint tradeoffs invalid: ") + e.what());
    }

    NetworkSlots<Shape> shapes;
    try {
        shapes = param_shapes(spec);
    } catch (const ContractViolation& e) {
        throw FormatError(std::string("checkpoint architecture invalid: ") + e.what());
    }
    std::vector<std::pair<std::string, Shape>> expected;
    visit_params(shapes, [&](const std::string& name, const Shape& s, ParamGroup) { expected.emplace_back(name, s); });

    const auto blocks = r.le<std::uint32_t>();
    if (blocks != expected.size()) {
        throw FormatError("checkpoint has " + std::to_string(blocks) + " parameter blocks, architecture needs " +
                          std::to_string(expected.size()));
    }
    std::vector<Tensor<float>> tensors;
    tensors.reserve(blocks);
    for (const auto& [want_name, want_shape] : expected) {
        const std::string name = r.str(r.le<std::uint16_t>());
        if (name != want_name) throw FormatError("expected block '" + want_name + "', found '" + name + "'");
        Shape shape(r.le<std::uint8_t>());
        for (auto& d : shape) d = r.le<std::uint32_t>();
        if (shape != want_shape) {
            throw FormatError("block '" + name + "' has shape " + shape_str(shape) + ", expected " +
                              shape_str(want_shape));
        }
        Tensor<float> t(shape);
        r.need(t.size() * 4);
        for (auto& v : t.values()) v = r.f32();
        tensors.push_back(std::move(t));
    }
    if (r.pos != bytes.size()) {
        throw FormatError(std::to_string(bytes.size() - r.pos) + " trailing bytes after checkpoint");
    }
    std::size_t i = 0;
    c.model.params = map_params<Tensor<float>>(shapes, [&](const std::string&, const Shape&, ParamGroup) {
        return std::move(tensors[i++]);
    });
    return c;
}

std::uint64_t checkpoint_hash(const Checkpoint& c)
{
    return fnv1a64(serialize_checkpoint(c));
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("short write to " + path.string());
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c)
{
    auto tmp = path;
    tmp += ".tmp";
    write_bytes(tmp, serialize_checkpoint(c));
    std::filesystem::rename(tmp, path);
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path)
{
    const auto bytes = read_bytes(path);
    try {
        return {parse_checkpoint(bytes), fnv1a64(bytes)};
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

} // namespace mae
