#include <algorithm>
#include <cmath>
#include <vector>

#include "foveal/errors.hpp"
#include "foveal/rng.hpp"
#include "foveal/scnn.hpp"

namespace foveal {

namespace {

// LIF population integrated exactly over each step for a current held
// constant across the step. Spike times are interpolated inside the step and
// the refractory period is tracked in continuous time, so constant currents
// reproduce the closed-form rate at any dt.
class LifPopulation {
public:
    LifPopulation(std::size_t n, const LifParams& lif, Rng* start = nullptr)
        : v_(n, 0.0),
          refractory_(n, 0.0),
          dt_(lif.dt),
          tau_rc_(lif.tau_rc),
          tau_ref_(lif.tau_ref),
          v_th_(lif.v_th) {
        if (start)
            for (double& v : v_) v = start->uniform(0.0, v_th_);
    }

    // Places each neuron at a uniformly random phase of its steady-state
    // cycle under a constant current; subthreshold neurons rest at j.
    void start_in_steady_state(const std::vector<double>& current, Rng& rng) {
        for (std::size_t i = 0; i < v_.size(); ++i) {
            const double j = current[i];
            refractory_[i] = 0.0;
            if (j <= v_th_) {
                v_[i] = j;
                continue;
            }
            const double period = tau_ref_ + tau_rc_ * std::log1p(v_th_ / (j - v_th_));
            const double phase = rng.uniform(0.0, period);
            if (phase < tau_ref_) {
                v_[i] = 0.0;
                refractory_[i] = tau_ref_ - phase;
            } else {
                v_[i] = -j * std::expm1(-(phase - tau_ref_) / tau_rc_);
            }
        }
    }

    // Advances one step; appends the indices that spiked.
    void step(const std::vector<double>& current, std::vector<std::size_t>& spikes) {
        spikes.clear();
        for (std::size_t i = 0; i < v_.size(); ++i) {
            const double active = std::clamp(dt_ - refractory_[i], 0.0, dt_);
            refractory_[i] -= dt_;
            if (active <= 0.0) continue;
            const double j = current[i];
            v_[i] -= (j - v_[i]) * std::expm1(-active / tau_rc_);
            if (v_[i] > v_th_) {
                // Time from the crossing to the end of the step.
                const double overshoot = -tau_rc_ * std::log1p(-(v_[i] - v_th_) / (j - v_th_));
                spikes.push_back(i);
                v_[i] = 0.0;
                refractory_[i] = tau_ref_ - overshoot;
            }
        }
    }

private:
    std::vector<double> v_;
    std::vector<double> refractory_;  // seconds left
    double dt_;
    double tau_rc_;
    double tau_ref_;
    double v_th_;
};

// Scatters pooled spike input through a 3x3 "same" convolution:
// current(o, y, x) += w(o, i, dy, dx) * in(i, y + dy - 1, x + dx - 1).
void scatter_conv(const ConvLayer& layer, int side, const std::vector<std::size_t>& active,
                  const std::vector<double>& pooled, std::vector<double>& current) {
    const std::size_t plane = static_cast<std::size_t>(side) * side;
    for (int o = 0; o < layer.out_channels; ++o)
        std::fill_n(current.begin() + static_cast<std::ptrdiff_t>(o * plane), plane,
                    layer.bias[static_cast<std::size_t>(o)]);
    for (std::size_t idx : active) {
        const double q = pooled[idx];
        const int i = static_cast<int>(idx / plane);
        const int y = static_cast<int>((idx % plane) / side);
        const int x = static_cast<int>(idx % side);
        for (int o = 0; o < layer.out_channels; ++o) {
            double* out = current.data() + o * plane;
            for (int dy = 0; dy < kConvKernel; ++dy) {
                const int ty = y - dy + 1;
                if (ty < 0 || ty >= side) continue;
                for (int dx = 0; dx < kConvKernel; ++dx) {
                    const int tx = x - dx + 1;
                    if (tx < 0 || tx >= side) continue;
                    out[static_cast<std::size_t>(ty) * side + tx] += layer.w(o, i, dy, dx) * q;
                }
            }
        }
    }
}

// Routes spikes of a (channels, side, side) layer into its 2x2 pooled map.
// Returns the pooled cells that received input.
void pool_spikes(const std::vector<std::size_t>& spikes, int side, double magnitude, std::vector<double>& pooled,
                 std::vector<std::size_t>& active) {
    for (std::size_t idx : active) pooled[idx] = 0.0;
    active.clear();
    const std::size_t plane = static_cast<std::size_t>(side) * side;
    const int half = side / 2;
    const std::size_t half_plane = static_cast<std::size_t>(half) * half;
    for (std::size_t idx : spikes) {
        const std::size_t c = idx / plane;
        const int y = static_cast<int>((idx % plane) / side);
        const int x = static_cast<int>(idx % side);
        const std::size_t target = c * half_plane + static_cast<std::size_t>(y / 2) * half + x / 2;
        if (pooled[target] == 0.0) active.push_back(target);
        pooled[target] += 0.25 * magnitude;
    }
    std::sort(active.begin(), active.end());
}

}  // namespace

std::size_t simulate_lif_spikes(double current, const LifParams& lif, std::size_t steps) {
    lif.check();
    LifPopulation neuron(1, lif);
    const std::vector<double> j{current};
    std::vector<std::size_t> spikes;
    std::size_t count = 0;
    for (std::size_t s = 0; s < steps; ++s) {
        neuron.step(j, spikes);
        count += spikes.size();
    }
    return count;
}

InferenceTrace spiking_infer(const ScnnParams& params, const LifParams& lif, const FrameView& frame, int steps,
                             int settle_steps) {
    lif.check();
    if (frame.height != params.input_size || frame.width != params.input_size)
        throw ShapeError("frame does not match the network geometry");
    if (steps < 1) throw ParameterError("steps must be positive");
    if (settle_steps < 0) throw ParameterError("settle_steps must be non-negative");

    const int n0 = static_cast<int>(params.input_size);
    const std::array<int, 3> sides = {n0, n0 / 2, n0 / 4};
    auto size_of = [&](std::size_t l) {
        return static_cast<std::size_t>(params.conv[l].out_channels) * sides[l] * sides[l];
    };

    // The frame is a constant input current, so the first layer's drive is
    // computed once.
    std::vector<double> drive1(size_of(0));
    {
        const ConvLayer& c = params.conv[0];
        const std::size_t plane = static_cast<std::size_t>(n0) * n0;
        for (int o = 0; o < c.out_channels; ++o) {
            double* out = drive1.data() + o * plane;
            std::fill_n(out, plane, c.bias[static_cast<std::size_t>(o)]);
            for (int dy = 0; dy < kConvKernel; ++dy)
                for (int dx = 0; dx < kConvKernel; ++dx) {
                    const double w = c.w(o, 0, dy, dx);
                    for (int y = 0; y < n0; ++y) {
                        const int sy = y + dy - 1;
                        if (sy < 0 || sy >= n0) continue;
                        for (int x = 0; x < n0; ++x) {
                            const int sx = x + dx - 1;
                            if (sx < 0 || sx >= n0) continue;
                            out[static_cast<std::size_t>(y) * n0 + x] += w * frame.at(sy, sx);
                        }
                    }
                }
        }
    }

    // Membranes start at seeded uniform voltages in [0, v_th) so that equal
    // currents do not fire in lockstep and the start-up transient is short.
    Rng start(kInitialVoltageSeed);
    std::array<LifPopulation, 3> layers = {LifPopulation(size_of(0), lif, &start),
                                           LifPopulation(size_of(1), lif, &start),
                                           LifPopulation(size_of(2), lif, &start)};
    layers[0].start_in_steady_state(drive1, start);
    std::array<std::vector<double>, 3> current = {drive1, std::vector<double>(size_of(1)),
                                                  std::vector<double>(size_of(2))};
    std::array<std::vector<double>, 3> pooled;
    std::array<std::vector<std::size_t>, 3> active;
    for (std::size_t l = 0; l < 3; ++l) pooled[l].assign(size_of(l) / 4, 0.0);

    const double spike_value = lif.amplitude / lif.dt;
    const DenseLayer& dense = params.dense;
    InferenceTrace trace;
    trace.voltages.reserve(static_cast<std::size_t>(steps));
    Scores voltage{};
    std::vector<std::size_t> spikes;

    // Spike-driven layers see their input through a first-order synapse; the
    // filtered currents start at the bias level.
    const double syn = lif.tau_syn > 0 ? -std::expm1(-lif.dt / lif.tau_syn) : 1.0;
    std::array<std::vector<double>, 3> filtered;
    for (std::size_t l = 1; l < 3; ++l) {
        const std::size_t plane = size_of(l) / static_cast<std::size_t>(params.conv[l].out_channels);
        filtered[l].resize(size_of(l));
        for (std::size_t i = 0; i < filtered[l].size(); ++i) filtered[l][i] = params.conv[l].bias[i / plane];
    }

    for (int s = -settle_steps; s < steps; ++s) {
        const bool reading = s >= 0;
        for (std::size_t l = 0; l < 3; ++l) {
            if (l == 0) {
                layers[l].step(current[l], spikes);
            } else {
                scatter_conv(params.conv[l], sides[l], active[l - 1], pooled[l - 1], current[l]);
                for (std::size_t i = 0; i < current[l].size(); ++i)
                    filtered[l][i] += syn * (current[l][i] - filtered[l][i]);
                layers[l].step(filtered[l], spikes);
            }
            if (reading) trace.hidden_spikes += spikes.size();
            pool_spikes(spikes, sides[l], spike_value, pooled[l], active[l]);
        }
        if (!reading) continue;
        // Non-spiking read-out: integrate the dense layer's weighted input.
        Scores drive{};
        for (int o = 0; o < kNumClasses; ++o) drive[static_cast<std::size_t>(o)] = dense.bias[static_cast<std::size_t>(o)];
        for (std::size_t idx : active[2]) {
            const double q = pooled[2][idx];
            const double* w = &dense.weights[idx * kNumClasses];
            for (int o = 0; o < kNumClasses; ++o) drive[static_cast<std::size_t>(o)] += q * w[o];
        }
        for (int o = 0; o < kNumClasses; ++o) voltage[static_cast<std::size_t>(o)] += lif.dt * drive[static_cast<std::size_t>(o)];
        trace.voltages.push_back(voltage);
    }
    trace.predicted = argmax(voltage);
    return trace;
}

}  // namespace foveal
