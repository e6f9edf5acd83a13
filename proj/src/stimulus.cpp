#include "foveal/stimulus.hpp"

#include <cmath>
#include <string>

#include "foveal/errors.hpp"
#include "foveal/rng.hpp"

namespace foveal {

namespace {

// Absorbs representational error in |d| / theta so that a swing of exactly
// n thresholds (e.g. returning to a previously visited level) emits n events.
constexpr double kStepTolerance = 1e-9;

}  // namespace

void check(const BarStimulus& stim) {
    if (stim.width == 0 || stim.height == 0) throw ParameterError("stimulus dimensions must be positive");
    if (stim.num_bars <= 0 || stim.width % stim.num_bars != 0)
        throw ParameterError("num_bars = " + std::to_string(stim.num_bars) + " does not divide width " +
                             std::to_string(stim.width));
    if (!(stim.black_level > 0.0)) throw ParameterError("black_level must be > 0");
    if (!(stim.white_level > stim.black_level)) throw ParameterError("white_level must exceed black_level");
    if (stim.frame_period_us == 0) throw ParameterError("frame_period_us must be positive");
    if (stim.displacement_px_per_frame < 0) throw ParameterError("displacement must be non-negative");
}

void check(const DvsEmulatorConfig& cfg) {
    if (!(cfg.threshold_log > 0.0)) throw ParameterError("threshold_log must be > 0");
    if (!(cfg.noise_probability >= 0.0 && cfg.noise_probability <= 1.0))
        throw ParameterError("noise_probability must lie in [0, 1]");
}

LuminanceGrid render_frame(const BarStimulus& stim, std::size_t frame_idx) {
    check(stim);
    if (frame_idx >= stim.num_frames)
        throw RangeError("frame index " + std::to_string(frame_idx) + " >= num_frames " +
                         std::to_string(stim.num_frames));

    const std::uint64_t width = stim.width;
    const std::uint64_t bar_width = width / static_cast<std::uint64_t>(stim.num_bars);
    const std::uint64_t shift =
        (static_cast<std::uint64_t>(frame_idx) * static_cast<std::uint64_t>(stim.displacement_px_per_frame) +
         static_cast<std::uint64_t>(((stim.phase_px % static_cast<int>(width)) + width) % width)) %
        width;

    std::vector<double> row(width);
    for (std::uint64_t x = 0; x < width; ++x) {
        const bool white = (((x + shift) % width) / bar_width) % 2 == 0;
        row[x] = white ? stim.white_level : stim.black_level;
    }

    LuminanceGrid grid{stim.width, stim.height, {}};
    grid.values.reserve(width * stim.height);
    for (std::uint16_t y = 0; y < stim.height; ++y) grid.values.insert(grid.values.end(), row.begin(), row.end());
    return grid;
}

EventStream dvs_emulate(std::span<const LuminanceGrid> frames, std::uint64_t frame_period_us,
                        const DvsEmulatorConfig& cfg) {
    check(cfg);
    EventStream out;
    if (frames.empty()) return out;

    const std::uint16_t width = frames.front().width;
    const std::uint16_t height = frames.front().height;
    out.width = width;
    out.height = height;
    const std::size_t n_pixels = static_cast<std::size_t>(width) * height;

    for (const LuminanceGrid& g : frames) {
        if (g.width != width || g.height != height || g.values.size() != n_pixels)
            throw DimensionError("luminance grids must share one size");
    }

    // The reference of each pixel is log L0 + steps * theta; keeping the
    // step count integral stops the reference drifting over long sweeps.
    std::vector<double> base(n_pixels);
    std::vector<std::int64_t> steps(n_pixels, 0);
    for (std::size_t p = 0; p < n_pixels; ++p) {
        const double v = frames.front().values[p];
        if (!(v > 0.0)) throw ParameterError("luminance must be positive");
        base[p] = std::log(v);
    }

    const double theta = cfg.threshold_log;
    Rng rng(cfg.seed);
    const bool noisy = cfg.noise_probability > 0.0;

    for (std::size_t k = 1; k < frames.size(); ++k) {
        const std::uint64_t t = static_cast<std::uint64_t>(k) * frame_period_us;
        const auto& lum = frames[k].values;
        for (std::size_t p = 0; p < n_pixels; ++p) {
            if (!(lum[p] > 0.0)) throw ParameterError("luminance must be positive");
            const double reference = base[p] + static_cast<double>(steps[p]) * theta;
            const double d = std::log(lum[p]) - reference;
            const auto n = static_cast<std::int64_t>(std::floor(std::abs(d) / theta + kStepTolerance));
            const auto x = static_cast<std::uint16_t>(p % width);
            const auto y = static_cast<std::uint16_t>(p / width);
            if (n > 0) {
                const std::int8_t pol = d > 0 ? 1 : -1;
                for (std::int64_t i = 0; i < n; ++i) out.events.push_back({t, x, y, pol});
                steps[p] += pol * n;
            }
            if (noisy && rng.uniform() < cfg.noise_probability) {
                out.events.push_back({t, x, y, static_cast<std::int8_t>(rng.uniform() < 0.5 ? 1 : -1)});
            }
        }
    }
    return out;
}

EventStream dvs_emulate(const BarStimulus& stim, const DvsEmulatorConfig& cfg) {
    check(stim);
    std::vector<LuminanceGrid> frames;
    frames.reserve(stim.num_frames);
    for (std::size_t k = 0; k < stim.num_frames; ++k) frames.push_back(render_frame(stim, k));
    EventStream s = dvs_emulate(frames, stim.frame_period_us, cfg);
    s.width = stim.width;
    s.height = stim.height;
    return s;
}

int num_bars_for_label(int label_idx) {
    if (label_idx < 0 || label_idx >= kNumClasses)
        throw RangeError("label index " + std::to_string(label_idx) + " outside 0..6");
    return 1 << (label_idx + 1);
}

Recording generate_recording(int label_idx, const DvsEmulatorConfig& cfg, std::size_t num_frames,
                             const BarStimulus& base) {
    BarStimulus stim = base;
    stim.num_bars = num_bars_for_label(label_idx);
    stim.num_frames = num_frames;
    return {dvs_emulate(stim, cfg), label_idx};
}

}  // namespace foveal
