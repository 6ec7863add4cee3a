// Copyright 2026 The mae-codec Authors
// SPDX-License-Identifier: Apache-2.0

#include "mae/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <string>

namespace mae {

namespace {

double softplus(double x)
{
    return x > 30.0 ? x : std::log1p(std::exp(x));
}

double sigmoid(double x)
{
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// Constrained parameters of one channel's cumulative, in double precision.
struct ChannelCurve {
    double w1[3], s1[3], b1[3];  // w = softplus(H), s = sigmoid(H) = dw/dH
    double w2[9], s2[9], b2[3];
    double w3[3], s3[3], b3;
    double k1[3], k2[3];  // tanh(a)

    template <class T>
    static ChannelCurve from(const FactorizedDensity<T>& psi, std::size_t c)
    {
        ChannelCurve cc{};
        for (int j = 0; j < 3; ++j) {
            const double h1 = psi.H1[c * 3 + j];
            cc.w1[j] = softplus(h1);
            cc.s1[j] = sigmoid(h1);
            cc.b1[j] = psi.b1[c * 3 + j];
            const double h3 = psi.H3[c * 3 + j];
            cc.w3[j] = softplus(h3);
            cc.s3[j] = sigmoid(h3);
            cc.b2[j] = psi.b2[c * 3 + j];
            cc.k1[j] = std::tanh(static_cast<double>(psi.a1[c * 3 + j]));
            cc.k2[j] = std::tanh(static_cast<double>(psi.a2[c * 3 + j]));
        }
        for (int j = 0; j < 9; ++j) {
            const double h2 = psi.H2[c * 9 + j];
            cc.w2[j] = softplus(h2);
            cc.s2[j] = sigmoid(h2);
        }
        cc.b3 = psi.b3[c];
        return cc;
    }
};

struct Trace {
    double t;
    double th1[3], f1[3];
    double th2[3], f2[3];
    double logit;
};

Trace logit_forward(const ChannelCurve& cc, double t)
{
    Trace tr{};
    tr.t = t;
    for (int j = 0; j < 3; ++j) {
        const double h = cc.w1[j] * t + cc.b1[j];
        tr.th1[j] = std::tanh(h);
        tr.f1[j] = h + cc.k1[j] * tr.th1[j];
    }
    for (int j = 0; j < 3; ++j) {
        double h = cc.b2[j];
        for (int i = 0; i < 3; ++i) h += cc.w2[j * 3 + i] * tr.f1[i];
        tr.th2[j] = std::tanh(h);
        tr.f2[j] = h + cc.k2[j] * tr.th2[j];
    }
    double l = cc.b3;
    for (int i = 0; i < 3; ++i) l += cc.w3[i] * tr.f2[i];
    tr.logit = l;
    return tr;
}

// Gradient accumulators of one channel's raw parameters.
struct ChannelGrad {
    double H1[3]{}, H2[9]{}, H3[3]{}, b1[3]{}, b2[3]{}, b3 = 0, a1[3]{}, a2[3]{};
};

// Backpropagates g = dL/dlogit through the trace; returns dL/dt.
double logit_backward(const ChannelCurve& cc, const Trace& tr, double g, ChannelGrad& out)
{
    double gf2[3];
    out.b3 += g;
    for (int i = 0; i < 3; ++i) {
        out.H3[i] += g * tr.f2[i] * cc.s3[i];
        gf2[i] = g * cc.w3[i];
    }
    double gf1[3] = {0, 0, 0};
    for (int j = 0; j < 3; ++j) {
        const double sech2 = 1.0 - tr.th2[j] * tr.th2[j];
        const double gh = gf2[j] * (1.0 + cc.k2[j] * sech2);
        out.a2[j] += gf2[j] * tr.th2[j] * (1.0 - cc.k2[j] * cc.k2[j]);
        out.b2[j] += gh;
        for (int i = 0; i < 3; ++i) {
            out.H2[j * 3 + i] += gh * tr.f1[i] * cc.s2[j * 3 + i];
            gf1[i] += gh * cc.w2[j * 3 + i];
        }
    }
    double gt = 0.0;
    for (int j = 0; j < 3; ++j) {
        const double sech2 = 1.0 - tr.th1[j] * tr.th1[j];
        const double gh = gf1[j] * (1.0 + cc.k1[j] * sech2);
        out.a1[j] += gf1[j] * tr.th1[j] * (1.0 - cc.k1[j] * cc.k1[j]);
        out.b1[j] += gh;
        out.H1[j] += gh * tr.t * cc.s1[j];
        gt += gh * cc.w1[j];
    }
    return gt;
}

// c(hi) - c(lo) computed on the side of the logistic that avoids cancellation.
struct Bin {
    double p;
    double sign;
};

Bin bin_from_logits(double upper, double lower)
{
    const double s = (upper + lower) > 0 ? -1.0 : 1.0;
    return {std::abs(sigmoid(s * upper) - sigmoid(s * lower)), s};
}

double bin_probability_curve(const ChannelCurve& cc, double v)
{
    const Bin b = bin_from_logits(logit_forward(cc, v + 0.5).logit, logit_forward(cc, v - 0.5).logit);
    return std::max(b.p, kProbabilityFloor);
}

template <class T>
void check_density_shape(const Shape& vs, std::size_t channels)
{
    if (vs.size() < 2 || vs[1] != channels) {
        throw ContractViolation("entropy model has " + std::to_string(channels) +
                                " channels but input shape is " + shape_str(vs));
    }
}

} // namespace

template <class T>
FactorizedDensity<T> density_init(std::size_t channels, std::mt19937_64& rng, double init_scale)
{
    const double scale = std::pow(init_scale, 1.0 / 3.0);
    auto inv_softplus = [](double y) { return std::log(std::expm1(y)); };
    FactorizedDensity<T> psi{
        Tensor<T>(Shape{channels, 3}, static_cast<T>(inv_softplus(1.0 / (scale * 3.0)))),
        Tensor<T>(Shape{channels, 3, 3}, static_cast<T>(inv_softplus(1.0 / (scale * 3.0)))),
        Tensor<T>(Shape{channels, 3}, static_cast<T>(inv_softplus(1.0 / scale))),
        Tensor<T>(Shape{channels, 3}),
        Tensor<T>(Shape{channels, 3}),
        Tensor<T>(Shape{channels}),
        Tensor<T>(Shape{channels, 3}),
        Tensor<T>(Shape{channels, 3}),
    };
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (auto* b : {&psi.b1, &psi.b2, &psi.b3})
        for (auto& x : b->values()) x = static_cast<T>(u(rng));
    return psi;
}

template <class T>
Tensor<std::int32_t> quantize(const Tensor<T>& z)
{
    Tensor<std::int32_t> q(z.shape());
    for (std::size_t i = 0; i < z.size(); ++i)
        q[i] = static_cast<std::int32_t>(std::round(static_cast<double>(z[i])));
    return q;
}

template <class T>
Tensor<T> uniform_noise(const Shape& shape, std::mt19937_64& rng)
{
    Tensor<T> u(shape);
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    for (auto& x : u.values()) {
        // Guard the open upper end against rounding into T.
        T v = static_cast<T>(dist(rng));
        if (v >= T(0.5)) v = std::nextafter(T(0.5), T(0));
        x = v;
    }
    return u;
}

template <class T>
Var<T> noise_proxy(const Var<T>& z, std::mt19937_64& rng)
{
    return ad::add(z, z.tape().constant(uniform_noise<T>(z.shape(), rng)));
}

template <class T>
double cumulative(const FactorizedDensity<T>& psi, std::size_t channel, double t)
{
    return sigmoid(logit_forward(ChannelCurve::from(psi, channel), t).logit);
}

double bin_probability(const std::function<double(double)>& cdf, double v)
{
    return std::max(cdf(v + 0.5) - cdf(v - 0.5), kProbabilityFloor);
}

template <class T>
Tensor<double> density_eval(const Tensor<T>& v, const FactorizedDensity<T>& psi)
{
    const std::size_t ch = density_channels(psi);
    check_density_shape<T>(v.shape(), ch);
    const std::size_t batch = v.shape()[0];
    const std::size_t plane = v.size() / (batch * ch);
    Tensor<double> p(v.shape());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ci = 0; ci < static_cast<std::ptrdiff_t>(ch); ++ci) {
        const auto c = static_cast<std::size_t>(ci);
        const ChannelCurve cc = ChannelCurve::from(psi, c);
        for (std::size_t n = 0; n < batch; ++n)
            for (std::size_t i = 0; i < plane; ++i) {
                const std::size_t idx = (n * ch + c) * plane + i;
                p[idx] = bin_probability_curve(cc, static_cast<double>(v[idx]));
            }
    }
    return p;
}

template <class T>
Var<T> likelihood(const Var<T>& v, const DensitySlots<Var<T>>& psi_vars)
{
    FactorizedDensity<T> psi{psi_vars.H1.value(), psi_vars.H2.value(), psi_vars.H3.value(),
                             psi_vars.b1.value(), psi_vars.b2.value(), psi_vars.b3.value(),
                             psi_vars.a1.value(), psi_vars.a2.value()};
    const std::size_t ch = density_channels(psi);
    check_density_shape<T>(v.shape(), ch);
    const std::size_t batch = v.shape()[0];
    const std::size_t plane = v.value().size() / (batch * ch);

    Tensor<T> out(v.shape());
    const Tensor<T>& vv = v.value();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ci = 0; ci < static_cast<std::ptrdiff_t>(ch); ++ci) {
        const auto c = static_cast<std::size_t>(ci);
        const ChannelCurve cc = ChannelCurve::from(psi, c);
        for (std::size_t n = 0; n < batch; ++n)
            for (std::size_t i = 0; i < plane; ++i) {
                const std::size_t idx = (n * ch + c) * plane + i;
                out[idx] = static_cast<T>(bin_probability_curve(cc, static_cast<double>(vv[idx])));
            }
    }

    auto psi_ptr = std::make_shared<FactorizedDensity<T>>(std::move(psi));
    Tape<T>& tape = v.tape();
    std::initializer_list<Var<T>> parents = {v,           psi_vars.H1, psi_vars.H2,
                                             psi_vars.H3, psi_vars.b1, psi_vars.b2,
                                             psi_vars.b3, psi_vars.a1, psi_vars.a2};
    return tape.record(
        std::move(out), parents,
        [v, psi_vars, psi_ptr, ch, batch, plane](Tape<T>& tape, const Tensor<T>& g) {
            const FactorizedDensity<T>& psi = *psi_ptr;
            const Tensor<T>& vv = v.value();
            std::vector<ChannelGrad> grads(ch);
            Tensor<T>* gv = v.requires_grad() ? &tape.grad_buffer(v) : nullptr;
#pragma omp parallel for schedule(static)
            for (std::ptrdiff_t ci = 0; ci < static_cast<std::ptrdiff_t>(ch); ++ci) {
                const auto c = static_cast<std::size_t>(ci);
                const ChannelCurve cc = ChannelCurve::from(psi, c);
                ChannelGrad& cg = grads[c];
                for (std::size_t n = 0; n < batch; ++n)
                    for (std::size_t i = 0; i < plane; ++i) {
                        const std::size_t idx = (n * ch + c) * plane + i;
                        const double val = static_cast<double>(vv[idx]);
                        const Trace up = logit_forward(cc, val + 0.5);
                        const Trace lo = logit_forward(cc, val - 0.5);
                        const Bin b = bin_from_logits(up.logit, lo.logit);
                        if (b.p < kProbabilityFloor) continue;
                        const double gp = static_cast<double>(g[idx]);
                        const double su = sigmoid(b.sign * up.logit);
                        const double sl = sigmoid(b.sign * lo.logit);
                        const double g_up = gp * su * (1.0 - su);
                        const double g_lo = -gp * sl * (1.0 - sl);
                        const double gt = logit_backward(cc, up, g_up, cg) +
                                          logit_backward(cc, lo, g_lo, cg);
                        if (gv) (*gv)[idx] += static_cast<T>(gt);
                    }
            }
            auto scatter = [&](const Var<T>& var, auto member, std::size_t width) {
                if (!var.requires_grad()) return;
                Tensor<T>& dst = tape.grad_buffer(var);
                for (std::size_t c = 0; c < ch; ++c)
                    for (std::size_t j = 0; j < width; ++j)
                        dst[c * width + j] += static_cast<T>(member(grads[c])[j]);
            };
            scatter(psi_vars.H1, [](ChannelGrad& cg) { return cg.H1; }, 3);
            scatter(psi_vars.H2, [](ChannelGrad& cg) { return cg.H2; }, 9);
            scatter(psi_vars.H3, [](ChannelGrad& cg) { return cg.H3; }, 3);
            scatter(psi_vars.b1, [](ChannelGrad& cg) { return cg.b1; }, 3);
            scatter(psi_vars.b2, [](ChannelGrad& cg) { return cg.b2; }, 3);
            scatter(psi_vars.b3, [](ChannelGrad& cg) { return &cg.b3; }, 1);
            scatter(psi_vars.a1, [](ChannelGrad& cg) { return cg.a1; }, 3);
            scatter(psi_vars.a2, [](ChannelGrad& cg) { return cg.a2; }, 3);
        });
}

template <class T>
Var<T> rate_bits(const Var<T>& likelihoods)
{
    return ad::neg(ad::sum(ad::log2(likelihoods)));
}

CdfTable build_cdf_table(std::span<const double> probabilities, std::int32_t min_symbol)
{
    const std::size_t n = probabilities.size();
    if (n == 0 || n > kCdfTotal) {
        throw RangeError("cdf table needs between 1 and " + std::to_string(kCdfTotal) +
                         " symbols, got " + std::to_string(n));
    }
    double total = 0.0;
    for (double p : probabilities) total += std::max(p, 0.0);
    if (!(total > 0.0)) throw RangeError("cdf table probabilities sum to zero");

    const double spare = static_cast<double>(kCdfTotal - n);
    std::vector<std::uint32_t> freq(n);
    std::vector<double> residual(n);
    std::uint64_t assigned = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double share = std::max(probabilities[i], 0.0) / total * spare;
        const double whole = std::floor(share);
        freq[i] = 1 + static_cast<std::uint32_t>(whole);
        residual[i] = share - whole;
        assigned += freq[i];
    }
    std::uint64_t remainder = kCdfTotal - assigned;
    if (remainder > 0) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return residual[a] > residual[b]; });
        for (std::size_t k = 0; remainder > 0; ++k, --remainder) ++freq[order[k % n]];
    }
    CdfTable table;
    table.min_symbol = min_symbol;
    table.cdf.resize(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) table.cdf[i + 1] = table.cdf[i] + freq[i];
    return table;
}

template <class T>
double support_mass(const FactorizedDensity<T>& psi, std::size_t channel, int support)
{
    const ChannelCurve cc = ChannelCurve::from(psi, channel);
    const double hi = logit_forward(cc, support + 0.5).logit;
    const double lo = logit_forward(cc, -support - 0.5).logit;
    return bin_from_logits(hi, lo).p;
}

template <class T>
CdfTableSet build_cdf_tables(const FactorizedDensity<T>& psi, int support)
{
    if (support < 1) throw RangeError("cdf support must be at least 1");
    const std::size_t ch = density_channels(psi);
    const auto count = static_cast<std::size_t>(2 * support + 1);
    CdfTableSet set;
    set.support = support;
    set.channels.resize(ch);
    std::vector<std::string> failures(ch);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ci = 0; ci < static_cast<std::ptrdiff_t>(ch); ++ci) {
        const auto c = static_cast<std::size_t>(ci);
        const double mass = support_mass(psi, c, support);
        if (mass < 1.0 - 1e-6) {
            failures[c] = "channel " + std::to_string(c) + " keeps only " + std::to_string(mass) +
                          " of its mass inside support " + std::to_string(support) +
                          "; use a larger support";
            continue;
        }
        const ChannelCurve cc = ChannelCurve::from(psi, c);
        std::vector<double> probs(count);
        for (std::size_t i = 0; i < count; ++i) {
            const double v = static_cast<double>(static_cast<int>(i) - support);
            if (i == 0) {
                probs[i] = sigmoid(logit_forward(cc, v + 0.5).logit);
            } else if (i + 1 == count) {
                probs[i] = sigmoid(-logit_forward(cc, v - 0.5).logit);
            } else {
                probs[i] = bin_from_logits(logit_forward(cc, v + 0.5).logit,
                                           logit_forward(cc, v - 0.5).logit)
                               .p;
            }
        }
        set.channels[c] = build_cdf_table(probs, -support);
    }
    for (const auto& f : failures)
        if (!f.empty()) throw RangeError(f);
    return set;
}

template <class T>
CdfTableSet build_cdf_tables_auto(const FactorizedDensity<T>& psi, int support)
{
    constexpr int kMaxSupport = 16383;
    for (int s = support;; s = 2 * s + 1) {
        try {
            return build_cdf_tables(psi, s);
        } catch (const RangeError&) {
            if (2 * s + 1 > kMaxSupport) throw;
        }
    }
}

#define MAE_INSTANTIATE(T)                                                                      \
    template FactorizedDensity<T> density_init<T>(std::size_t, std::mt19937_64&, double);       \
    template Tensor<std::int32_t> quantize<T>(const Tensor<T>&);                                \
    template Tensor<T> uniform_noise<T>(const Shape&, std::mt19937_64&);                        \
    template Var<T> noise_proxy<T>(const Var<T>&, std::mt19937_64&);                            \
    template double cumulative<T>(const FactorizedDensity<T>&, std::size_t, double);            \
    template Tensor<double> density_eval<T>(const Tensor<T>&, const FactorizedDensity<T>&);     \
    template Var<T> likelihood<T>(const Var<T>&, const DensitySlots<Var<T>>&);                  \
    template Var<T> rate_bits<T>(const Var<T>&);                                                \
    template double support_mass<T>(const FactorizedDensity<T>&, std::size_t, int);             \
    template CdfTableSet build_cdf_tables<T>(const FactorizedDensity<T>&, int);                 \
    template CdfTableSet build_cdf_tables_auto<T>(const FactorizedDensity<T>&, int);

MAE_INSTANTIATE(float)
MAE_INSTANTIATE(double)
#undef MAE_INSTANTIATE

} // namespace mae
