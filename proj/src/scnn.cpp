#include "foveal/scnn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "foveal/errors.hpp"
#include "foveal/rng.hpp"

namespace foveal {

void LifParams::check() const {
    if (!(tau_rc > 0 && tau_ref > 0 && v_th > 0 && gamma > 0 && dt > 0 && amplitude > 0))
        throw ParameterError("LIF parameters must all be positive");
    if (!(dt < tau_ref)) throw ParameterError("dt must be smaller than tau_ref");
    if (!(tau_syn >= 0)) throw ParameterError("tau_syn must be non-negative");
}

double hard_lif_rate(double current, const LifParams& p) {
    if (current <= p.v_th) return 0.0;
    return p.amplitude / (p.tau_ref + p.tau_rc * std::log1p(p.v_th / (current - p.v_th)));
}

namespace {

// gamma * log(1 + exp(x / gamma)) without overflow.
double softplus(double x, double gamma) {
    const double u = x / gamma;
    if (u > 30.0) return x + gamma * std::log1p(std::exp(-u));
    return gamma * std::log1p(std::exp(u));
}

double logistic(double u) {
    if (u >= 0) return 1.0 / (1.0 + std::exp(-u));
    const double e = std::exp(u);
    return e / (1.0 + e);
}

struct RateEval {
    double rate;
    double slope;
};

RateEval soft_lif(double current, const LifParams& p) {
    const double x = current - p.v_th;
    const double rho = softplus(x, p.gamma);
    if (!(rho > 0.0)) return {0.0, 0.0};
    const double denom = p.tau_ref + p.tau_rc * std::log1p(p.v_th / rho);
    const double rate = p.amplitude / denom;
    // d/dj log(1 + v/rho) = -v / (rho (rho + v)) * sigmoid(x / gamma)
    const double dlog = -p.v_th / (rho * (rho + p.v_th)) * logistic(x / p.gamma);
    const double slope = -p.amplitude * p.tau_rc * dlog / (denom * denom);
    return {rate, std::isfinite(slope) ? slope : 0.0};
}

}  // namespace

double soft_lif_rate(double current, const LifParams& p) { return soft_lif(current, p).rate; }

double soft_lif_rate_derivative(double current, const LifParams& p) { return soft_lif(current, p).slope; }

std::uint32_t flattened_size(std::uint32_t input_size) { return input_size / 8; }

namespace {

void check_input_size(std::uint32_t s) {
    if (s == 0 || s % 8 != 0) throw ShapeError("input size must be a positive multiple of 8");
}

ConvLayer make_conv(int in, int out) {
    ConvLayer c;
    c.in_channels = in;
    c.out_channels = out;
    c.weights.assign(static_cast<std::size_t>(in) * out * kConvKernel * kConvKernel, 0.0);
    c.bias.assign(static_cast<std::size_t>(out), 0.0);
    return c;
}

}  // namespace

ScnnParams ScnnParams::zeros(std::uint32_t input_size) {
    check_input_size(input_size);
    ScnnParams p;
    p.input_size = input_size;
    p.conv[0] = make_conv(1, kConvFilters[0]);
    p.conv[1] = make_conv(kConvFilters[0], kConvFilters[1]);
    p.conv[2] = make_conv(kConvFilters[1], kConvFilters[2]);
    const std::uint32_t side = flattened_size(input_size);
    p.dense.inputs = kConvFilters[2] * static_cast<int>(side * side);
    p.dense.outputs = kNumClasses;
    p.dense.weights.assign(static_cast<std::size_t>(p.dense.inputs) * kNumClasses, 0.0);
    p.dense.bias.assign(kNumClasses, 0.0);
    return p;
}

ScnnParams ScnnParams::initialize(std::uint32_t input_size, std::uint64_t seed) {
    ScnnParams p = zeros(input_size);
    Rng rng(seed);
    for (ConvLayer& c : p.conv) {
        const double scale = kConvInitGain / std::sqrt(static_cast<double>(c.in_channels * kConvKernel * kConvKernel));
        for (double& w : c.weights) w = rng.uniform(-scale, scale);
        std::fill(c.bias.begin(), c.bias.end(), kConvInitBias);
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(p.dense.inputs));
    for (double& w : p.dense.weights) w = rng.uniform(-scale, scale);
    return p;
}

std::array<std::span<double>, 8> ScnnParams::tensors() {
    return {conv[0].weights, conv[0].bias, conv[1].weights, conv[1].bias,
            conv[2].weights, conv[2].bias, dense.weights,   dense.bias};
}

std::array<std::span<const double>, 8> ScnnParams::tensors() const {
    return {conv[0].weights, conv[0].bias, conv[1].weights, conv[1].bias,
            conv[2].weights, conv[2].bias, dense.weights,   dense.bias};
}

std::size_t ScnnParams::parameter_count() const {
    std::size_t n = 0;
    for (auto t : tensors()) n += t.size();
    return n;
}

bool operator==(const ScnnParams& a, const ScnnParams& b) {
    if (a.input_size != b.input_size) return false;
    const auto ta = a.tensors();
    const auto tb = b.tensors();
    for (std::size_t i = 0; i < ta.size(); ++i) {
        if (!std::equal(ta[i].begin(), ta[i].end(), tb[i].begin(), tb[i].end())) return false;
    }
    return true;
}

namespace {

// Channel-major activation planes.
struct Planes {
    int channels = 0;
    int side = 0;
    std::vector<double> v;

    Planes() = default;
    Planes(int c, int s) : channels(c), side(s), v(static_cast<std::size_t>(c) * s * s, 0.0) {}

    double* plane(int c) { return v.data() + static_cast<std::size_t>(c) * side * side; }
    const double* plane(int c) const { return v.data() + static_cast<std::size_t>(c) * side * side; }
};

// z = bias + correlate(in, w) with zero "same" padding.
void conv_forward(const ConvLayer& layer, const Planes& in, Planes& z) {
    const int n = in.side;
    z = Planes(layer.out_channels, n);
    for (int o = 0; o < layer.out_channels; ++o) {
        double* out = z.plane(o);
        std::fill(out, out + static_cast<std::size_t>(n) * n, layer.bias[static_cast<std::size_t>(o)]);
        for (int i = 0; i < layer.in_channels; ++i) {
            const double* src = in.plane(i);
            for (int dy = 0; dy < kConvKernel; ++dy) {
                for (int dx = 0; dx < kConvKernel; ++dx) {
                    const double w = layer.w(o, i, dy, dx);
                    const int oy = dy - 1;
                    const int ox = dx - 1;
                    const int y0 = std::max(0, -oy), y1 = std::min(n, n - oy);
                    const int x0 = std::max(0, -ox), x1 = std::min(n, n - ox);
                    for (int y = y0; y < y1; ++y) {
                        double* dst = out + static_cast<std::size_t>(y) * n;
                        const double* s = src + static_cast<std::size_t>(y + oy) * n + ox;
                        for (int x = x0; x < x1; ++x) dst[x] += w * s[x];
                    }
                }
            }
        }
    }
}

// Accumulates weight/bias gradients and, if d_in is non-null, the input
// gradient of conv_forward.
void conv_backward(const ConvLayer& layer, const Planes& in, const Planes& dz, ConvLayer& grad, Planes* d_in) {
    const int n = in.side;
    if (d_in) *d_in = Planes(layer.in_channels, n);
    for (int o = 0; o < layer.out_channels; ++o) {
        const double* g = dz.plane(o);
        double bsum = 0.0;
        for (std::size_t p = 0; p < static_cast<std::size_t>(n) * n; ++p) bsum += g[p];
        grad.bias[static_cast<std::size_t>(o)] += bsum;
        for (int i = 0; i < layer.in_channels; ++i) {
            const double* src = in.plane(i);
            double* back = d_in ? d_in->plane(i) : nullptr;
            for (int dy = 0; dy < kConvKernel; ++dy) {
                for (int dx = 0; dx < kConvKernel; ++dx) {
                    const int oy = dy - 1;
                    const int ox = dx - 1;
                    const int y0 = std::max(0, -oy), y1 = std::min(n, n - oy);
                    const int x0 = std::max(0, -ox), x1 = std::min(n, n - ox);
                    const double w = layer.w(o, i, dy, dx);
                    double acc = 0.0;
                    for (int y = y0; y < y1; ++y) {
                        const double* gr = g + static_cast<std::size_t>(y) * n;
                        const double* s = src + static_cast<std::size_t>(y + oy) * n + ox;
                        for (int x = x0; x < x1; ++x) acc += gr[x] * s[x];
                        if (back) {
                            double* b = back + static_cast<std::size_t>(y + oy) * n + ox;
                            for (int x = x0; x < x1; ++x) b[x] += w * gr[x];
                        }
                    }
                    grad.w(o, i, dy, dx) += acc;
                }
            }
        }
    }
}

void avg_pool(const Planes& in, Planes& out) {
    const int h = in.side / 2;
    out = Planes(in.channels, h);
    for (int c = 0; c < in.channels; ++c) {
        const double* s = in.plane(c);
        double* d = out.plane(c);
        for (int y = 0; y < h; ++y) {
            const double* r0 = s + static_cast<std::size_t>(2 * y) * in.side;
            const double* r1 = r0 + in.side;
            for (int x = 0; x < h; ++x) {
                d[static_cast<std::size_t>(y) * h + x] = 0.25 * (r0[2 * x] + r0[2 * x + 1] + r1[2 * x] + r1[2 * x + 1]);
            }
        }
    }
}

void avg_pool_backward(const Planes& d_out, Planes& d_in) {
    const int h = d_out.side;
    d_in = Planes(d_out.channels, 2 * h);
    for (int c = 0; c < d_out.channels; ++c) {
        const double* g = d_out.plane(c);
        double* d = d_in.plane(c);
        const int n = 2 * h;
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x) d[static_cast<std::size_t>(y) * n + x] = 0.25 * g[(y / 2) * h + x / 2];
    }
}

// Activations kept for the backward pass.
struct Trace {
    std::array<Planes, 3> inputs;  // conv inputs
    std::array<Planes, 3> currents;
    Planes flat;  // last pooled map
    Scores scores{};
};

Planes frame_planes(const ScnnParams& params, const FrameView& frame) {
    if (frame.height != params.input_size || frame.width != params.input_size)
        throw ShapeError("frame is " + std::to_string(frame.height) + "x" + std::to_string(frame.width) +
                         " but the network expects " + std::to_string(params.input_size) + "x" +
                         std::to_string(params.input_size));
    Planes in(1, static_cast<int>(params.input_size));
    std::copy(frame.values.begin(), frame.values.end(), in.v.begin());
    return in;
}

void run_forward(const ScnnParams& params, const LifParams& lif, const FrameView& frame, Trace& t) {
    t.inputs[0] = frame_planes(params, frame);
    for (std::size_t l = 0; l < 3; ++l) {
        conv_forward(params.conv[l], t.inputs[l], t.currents[l]);
        Planes rates = t.currents[l];
        for (double& v : rates.v) v = soft_lif_rate(v, lif);
        avg_pool(rates, l < 2 ? t.inputs[l + 1] : t.flat);
    }
    const DenseLayer& d = params.dense;
    for (int o = 0; o < kNumClasses; ++o) t.scores[static_cast<std::size_t>(o)] = d.bias[static_cast<std::size_t>(o)];
    for (int i = 0; i < d.inputs; ++i) {
        const double a = t.flat.v[static_cast<std::size_t>(i)];
        if (a == 0.0) continue;
        const double* w = &d.weights[static_cast<std::size_t>(i) * kNumClasses];
        for (int o = 0; o < kNumClasses; ++o) t.scores[static_cast<std::size_t>(o)] += a * w[o];
    }
}

void run_backward(const ScnnParams& params, const LifParams& lif, const Trace& t, const Scores& d_scores,
                  ScnnParams& grad) {
    const DenseLayer& d = params.dense;
    Planes d_flat(t.flat.channels, t.flat.side);
    for (int o = 0; o < kNumClasses; ++o) grad.dense.bias[static_cast<std::size_t>(o)] += d_scores[static_cast<std::size_t>(o)];
    for (int i = 0; i < d.inputs; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        const double a = t.flat.v[ii];
        const double* w = &d.weights[ii * kNumClasses];
        double* gw = &grad.dense.weights[ii * kNumClasses];
        double acc = 0.0;
        for (int o = 0; o < kNumClasses; ++o) {
            gw[o] += a * d_scores[static_cast<std::size_t>(o)];
            acc += w[o] * d_scores[static_cast<std::size_t>(o)];
        }
        d_flat.v[ii] = acc;
    }

    Planes d_pooled = std::move(d_flat);
    for (int l = 2; l >= 0; --l) {
        const auto li = static_cast<std::size_t>(l);
        Planes d_current;
        avg_pool_backward(d_pooled, d_current);
        const auto& z = t.currents[li].v;
        for (std::size_t p = 0; p < z.size(); ++p) d_current.v[p] *= soft_lif_rate_derivative(z[p], lif);
        Planes d_in;
        conv_backward(params.conv[li], t.inputs[li], d_current, grad.conv[li], l > 0 ? &d_in : nullptr);
        d_pooled = std::move(d_in);
    }
}

void zero(ScnnParams& g) {
    for (auto t : g.tensors()) std::fill(t.begin(), t.end(), 0.0);
}

}  // namespace

Scores forward_rate(const ScnnParams& params, const LifParams& lif, const FrameView& frame) {
    Trace t;
    run_forward(params, lif, frame, t);
    return t.scores;
}

std::vector<Scores> forward_rate(const ScnnParams& params, const LifParams& lif, const FrameTensor& batch) {
    std::vector<Scores> out;
    out.reserve(batch.count);
    for (std::size_t k = 0; k < batch.count; ++k) out.push_back(forward_rate(params, lif, batch.frame(k)));
    return out;
}

Scores softmax(const Scores& scores) {
    const double peak = *std::max_element(scores.begin(), scores.end());
    Scores p{};
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = std::exp(scores[i] - peak);
        total += p[i];
    }
    for (double& v : p) v /= total;
    return p;
}

double nll_loss(std::span<const Scores> probs, std::span<const int> labels) {
    if (probs.size() != labels.size()) throw ShapeError("probabilities and labels differ in length");
    if (probs.empty()) throw DataError("empty batch");
    constexpr double kFloor = 1e-12;  // only an exact zero is clamped
    double total = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const int l = labels[i];
        if (l < 0 || l >= kNumClasses) throw RangeError("label outside 0..6");
        const double p = probs[i][static_cast<std::size_t>(l)];
        total -= std::log(p > 0.0 ? p : kFloor);
    }
    return total / static_cast<double>(probs.size());
}

double loss_and_gradient(const ScnnParams& params, const LifParams& lif, const FrameTensor& frames,
                         std::span<const std::size_t> indices, std::span<const int> labels, ScnnParams* grad) {
    if (indices.size() != labels.size()) throw ShapeError("indices and labels differ in length");
    if (indices.empty()) throw DataError("empty batch");
    if (grad) {
        if (grad->input_size != params.input_size || grad->parameter_count() != params.parameter_count())
            *grad = ScnnParams::zeros(params.input_size);
        zero(*grad);
    }
    const double inv_m = 1.0 / static_cast<double>(indices.size());
    double total = 0.0;
    Trace t;
    for (std::size_t b = 0; b < indices.size(); ++b) {
        run_forward(params, lif, frames.frame(indices[b]), t);
        const Scores p = softmax(t.scores);
        const auto label = static_cast<std::size_t>(labels[b]);
        if (labels[b] < 0 || labels[b] >= kNumClasses) throw RangeError("label outside 0..6");
        // -log softmax via log-sum-exp: no floor, so the loss stays smooth
        // and p - onehot is its exact gradient even for saturated scores.
        const double top = *std::max_element(t.scores.begin(), t.scores.end());
        double z = 0.0;
        for (double v : t.scores) z += std::exp(v - top);
        total += top + std::log(z) - t.scores[label];
        if (grad) {
            Scores d = p;
            d[label] -= 1.0;
            for (double& v : d) v *= inv_m;
            run_backward(params, lif, t, d, *grad);
        }
    }
    return total * inv_m;
}

double annealed_gamma(const TrainConfig& cfg, const LifParams& lif, int epoch) {
    if (cfg.epochs <= 1) return lif.gamma;
    const double frac = static_cast<double>(epoch) / static_cast<double>(cfg.epochs - 1);
    return lif.gamma * std::pow(cfg.final_gamma / lif.gamma, frac);
}

TrainResult train(const Dataset& dataset, const TrainConfig& cfg, const LifParams& lif) {
    return train(dataset, cfg, lif, ScnnParams::initialize(dataset.frames.height, cfg.seed));
}

TrainResult train(const Dataset& dataset, const TrainConfig& cfg, const LifParams& lif, ScnnParams initial) {
    lif.check();
    if (cfg.batch_size < 1) throw ParameterError("batch_size must be >= 1");
    if (cfg.epochs < 0) throw ParameterError("epochs must be non-negative");
    if (!(cfg.learning_rate >= 0.0)) throw ParameterError("learning_rate must be non-negative");
    if (!(cfg.final_gamma > 0.0)) throw ParameterError("final_gamma must be positive");
    if (dataset.frames.height != initial.input_size || dataset.frames.width != initial.input_size)
        throw ShapeError("dataset frames do not match the network geometry");

    std::vector<std::size_t> order = dataset.indices(Split::train);
    if (order.empty()) throw DataError("training split is empty");

    TrainResult result;
    result.params = std::move(initial);
    ScnnParams grad = ScnnParams::zeros(result.params.input_size);
    // Adam moment estimates (beta1 0.9, beta2 0.999).
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    ScnnParams m = ScnnParams::zeros(result.params.input_size);
    ScnnParams v = ScnnParams::zeros(result.params.input_size);
    std::uint64_t step = 0;
    // Shuffles draw from a stream distinct from weight initialization.
    Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    const auto bs = static_cast<std::size_t>(cfg.batch_size);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        LifParams epoch_lif = lif;
        epoch_lif.gamma = annealed_gamma(cfg, lif, epoch);
        rng.shuffle(std::span<std::size_t>(order));
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += bs) {
            const std::size_t end = std::min(order.size(), start + bs);
            std::span<const std::size_t> idx(order.data() + start, end - start);
            std::vector<int> labels;
            labels.reserve(idx.size());
            for (std::size_t i : idx) labels.push_back(dataset.labels[i]);
            loss_sum += loss_and_gradient(result.params, epoch_lif, dataset.frames, idx, labels, &grad);
            ++batches;
            auto p = result.params.tensors();
            const auto g = std::as_const(grad).tensors();
            if (cfg.optimizer == Optimizer::sgd) {
                for (std::size_t t = 0; t < p.size(); ++t)
                    for (std::size_t i = 0; i < p[t].size(); ++i) p[t][i] -= cfg.learning_rate * g[t][i];
            } else {
                ++step;
                const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
                const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
                auto mt = m.tensors();
                auto vt = v.tensors();
                for (std::size_t t = 0; t < p.size(); ++t) {
                    for (std::size_t i = 0; i < p[t].size(); ++i) {
                        mt[t][i] = kBeta1 * mt[t][i] + (1.0 - kBeta1) * g[t][i];
                        vt[t][i] = kBeta2 * vt[t][i] + (1.0 - kBeta2) * g[t][i] * g[t][i];
                        p[t][i] -= cfg.learning_rate * (mt[t][i] / c1) / (std::sqrt(vt[t][i] / c2) + kEps);
                    }
                }
            }
        }
        result.epoch_loss.push_back(loss_sum / static_cast<double>(batches));
    }
    result.final_gamma = cfg.epochs > 0 ? annealed_gamma(cfg, lif, cfg.epochs - 1) : lif.gamma;
    return result;
}

int argmax(const Scores& s) {
    int best = 0;
    for (int i = 1; i < kNumClasses; ++i)
        if (s[static_cast<std::size_t>(i)] > s[static_cast<std::size_t>(best)]) best = i;
    return best;
}

EvalResult evaluate(const ScnnParams& params, const LifParams& lif, const Dataset& dataset, Split which) {
    const auto idx = dataset.indices(which);
    if (idx.empty()) throw DataError("evaluation split is empty");
    EvalResult r;
    std::size_t correct = 0;
    for (std::size_t i : idx) {
        const int pred = spiking_infer(params, lif, dataset.frames.frame(i)).predicted;
        const int truth = dataset.labels[i];
        r.predictions.push_back(pred);
        ++r.confusion[static_cast<std::size_t>(truth)][static_cast<std::size_t>(pred)];
        if (pred == truth) ++correct;
    }
    r.accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(idx.size());
    return r;
}

}  // namespace foveal
