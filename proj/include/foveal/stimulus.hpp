#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "foveal/events.hpp"

namespace foveal {

inline constexpr int kNumClasses = 7;

// Horizontally drifting pattern of equally wide black and white vertical
// bars. phase_px offsets the pattern at frame 0 (used to vary repetitions).
struct BarStimulus {
    int num_bars = 2;
    std::uint16_t width = kSensorSize;
    std::uint16_t height = kSensorSize;
    int displacement_px_per_frame = 2;
    std::size_t num_frames = 100;
    std::uint64_t frame_period_us = 10000;
    double white_level = 1.0;
    double black_level = 0.1;
    int phase_px = 0;
};

// Throws ParameterError unless num_bars divides width, levels are ordered
// and positive, and the frame clock is non-degenerate.
void check(const BarStimulus& stim);

struct LuminanceGrid {
    std::uint16_t width = 0;
    std::uint16_t height = 0;
    std::vector<double> values;  // row-major

    double at(std::size_t x, std::size_t y) const { return values[y * width + x]; }
};

struct DvsEmulatorConfig {
    double threshold_log = 0.3;
    // Probability per pixel per frame of an extra event with random
    // polarity. Zero disables noise and keeps the emulator noise-free.
    double noise_probability = 0.0;
    std::uint64_t seed = 0;
};

void check(const DvsEmulatorConfig& cfg);

LuminanceGrid render_frame(const BarStimulus& stim, std::size_t frame_idx);

// Log-intensity change detector over an arbitrary frame sequence. Frame k
// is stamped k * frame_period_us; frame 0 only initializes the reference.
EventStream dvs_emulate(std::span<const LuminanceGrid> frames, std::uint64_t frame_period_us,
                        const DvsEmulatorConfig& cfg);

EventStream dvs_emulate(const BarStimulus& stim, const DvsEmulatorConfig& cfg);

// Class k shows 2^(k+1) bars. Throws RangeError outside 0..6.
int num_bars_for_label(int label_idx);

// Deterministic recording for one class. Everything except num_bars and
// num_frames is taken from `base`.
Recording generate_recording(int label_idx, const DvsEmulatorConfig& cfg, std::size_t num_frames,
                             const BarStimulus& base = {});

}  // namespace foveal
