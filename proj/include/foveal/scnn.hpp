#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "foveal/frame_tensor.hpp"
#include "foveal/framing.hpp"
#include "foveal/stimulus.hpp"

namespace foveal {

// Leaky integrate-and-fire constants shared by the rate surrogate used for
// training and the spiking simulation used at inference. Times in seconds.
struct LifParams {
    double tau_rc = 0.02;
    double tau_ref = 0.002;
    double v_th = 1.0;
    double gamma = 1.0;  // softplus smoothing width
    double dt = 0.001;
    double amplitude = 0.1;  // output scale per unit firing rate
    double tau_syn = 0.005;   // spiking mode: low-pass on spike-driven input currents, 0 disables

    void check() const;
};

// Steady-state rate of a hard-threshold LIF neuron (zero at or below v_th).
double hard_lif_rate(double current, const LifParams& p);

// Smoothed rate: amplitude / (tau_ref + tau_rc * log(1 + v_th / rho(j - v_th)))
// with rho(x) = gamma * log(1 + exp(x / gamma)).
double soft_lif_rate(double current, const LifParams& p);
double soft_lif_rate_derivative(double current, const LifParams& p);

inline constexpr int kConvKernel = 3;
inline constexpr std::array<int, 3> kConvFilters = {8, 16, 32};
inline constexpr std::uint32_t kFullGeometry = 128;
inline constexpr std::uint32_t kReducedGeometry = 32;

struct ConvLayer {
    int in_channels = 0;
    int out_channels = 0;
    std::vector<double> weights;  // [out][in][3][3]
    std::vector<double> bias;     // [out]

    double& w(int o, int i, int dy, int dx) {
        return weights[((static_cast<std::size_t>(o) * in_channels + i) * kConvKernel + dy) * kConvKernel + dx];
    }
    double w(int o, int i, int dy, int dx) const {
        return weights[((static_cast<std::size_t>(o) * in_channels + i) * kConvKernel + dy) * kConvKernel + dx];
    }
};

struct DenseLayer {
    int inputs = 0;
    int outputs = 0;
    std::vector<double> weights;  // [inputs][outputs]
    std::vector<double> bias;     // [outputs]
};

inline constexpr double kConvInitGain = 6.0;
inline constexpr double kConvInitBias = 1.5;

// Three conv(3x3, same) -> LIF -> 2x2 average-pool blocks with 8, 16 and 32
// filters, then a dense layer from the flattened (channel, row, column)
// activations to the 7 class scores. input_size is 128 for the full network
// and 32 for the reduced one.
struct ScnnParams {
    std::uint32_t input_size = kFullGeometry;
    std::array<ConvLayer, 3> conv;
    DenseLayer dense;

    static ScnnParams zeros(std::uint32_t input_size);
    // Conv weights uniform in +-kConvInitGain/sqrt(fan_in) with biases
    // kConvInitBias, which puts resting currents above v_th; dense weights
    // uniform in +-1/sqrt(fan_in) with zero biases.
    static ScnnParams initialize(std::uint32_t input_size, std::uint64_t seed);

    // Trainable tensors in declaration order:
    // conv1.w, conv1.b, conv2.w, conv2.b, conv3.w, conv3.b, dense.w, dense.b.
    std::array<std::span<double>, 8> tensors();
    std::array<std::span<const double>, 8> tensors() const;
    std::size_t parameter_count() const;

    friend bool operator==(const ScnnParams& a, const ScnnParams& b);
};

// Side of the final pooled map for a given input size.
std::uint32_t flattened_size(std::uint32_t input_size);

using Scores = std::array<double, kNumClasses>;

Scores forward_rate(const ScnnParams& params, const LifParams& lif, const FrameView& frame);
std::vector<Scores> forward_rate(const ScnnParams& params, const LifParams& lif, const FrameTensor& batch);

Scores softmax(const Scores& scores);

// Mean negative log-likelihood of the true labels; a zero probability is
// clamped to 1e-12 before the log.
double nll_loss(std::span<const Scores> probs, std::span<const int> labels);

// Mean nll(softmax(forward_rate)) over the listed frames, evaluated as
// log-sum-exp minus the true score, and, when grad is non-null, its
// gradient with respect to every parameter (grad is overwritten).
double loss_and_gradient(const ScnnParams& params, const LifParams& lif, const FrameTensor& frames,
                         std::span<const std::size_t> indices, std::span<const int> labels, ScnnParams* grad);

enum class Optimizer { sgd, adam };

struct TrainConfig {
    int epochs = 3;
    int batch_size = 20;
    double learning_rate = 3e-3;
    Optimizer optimizer = Optimizer::adam;
    std::uint64_t seed = 0;
    double final_gamma = 0.1;  // lif.gamma is annealed geometrically to this
};

struct TrainResult {
    ScnnParams params;
    std::vector<double> epoch_loss;
    double final_gamma = 0.0;
};

// gamma used during the given epoch of a run.
double annealed_gamma(const TrainConfig& cfg, const LifParams& lif, int epoch);

TrainResult train(const Dataset& dataset, const TrainConfig& cfg, const LifParams& lif);
TrainResult train(const Dataset& dataset, const TrainConfig& cfg, const LifParams& lif, ScnnParams initial);

inline constexpr int kInferenceSteps = 60;
// Steps the hidden layers run before the read-out starts integrating, so the
// read-out window skips the start-up transient of the deeper layers.
inline constexpr int kSettleSteps = 10;

struct InferenceTrace {
    std::vector<Scores> voltages;  // output voltage after each step
    int predicted = 0;
    std::size_t hidden_spikes = 0;
};

// Seed of the initial membrane voltages used by spiking_infer.
inline constexpr std::uint64_t kInitialVoltageSeed = 0x5eed;

// Lowest index wins ties.
int argmax(const Scores& s);

// Presents the frame as a constant current for settle_steps + steps steps and
// integrates the read-out over the last `steps`.
InferenceTrace spiking_infer(const ScnnParams& params, const LifParams& lif, const FrameView& frame,
                             int steps = kInferenceSteps, int settle_steps = kSettleSteps);

// Spike count of one LIF neuron under constant current over `steps`.
std::size_t simulate_lif_spikes(double current, const LifParams& lif, std::size_t steps);

struct EvalResult {
    double accuracy = 0.0;  // percent
    std::array<std::array<std::size_t, kNumClasses>, kNumClasses> confusion{};  // [true][predicted]
    std::vector<int> predictions;
};

EvalResult evaluate(const ScnnParams& params, const LifParams& lif, const Dataset& dataset, Split which);

// "SCN1" | u32 input_height | u32 input_width | u32 tensor_count |
// per tensor: u32 rank, rank x u32 dims | f32 payload in declaration order.
std::uint64_t write_checkpoint(const ScnnParams& params, std::ostream& sink);
ScnnParams read_checkpoint(std::istream& source);

}  // namespace foveal
