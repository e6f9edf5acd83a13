#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "foveal/events.hpp"

namespace foveal {

enum class CellType { off_midget, on_midget, off_parasol, on_parasol };
enum class EdgeMode { zero_pad, circular };

inline constexpr double kDefaultSurroundRatio = 1.6;

// Ganglion-cell receptive field parameters.
struct DogKernelSpec {
    CellType cell_type = CellType::off_midget;
    int mat_dim = 5;
    double cent_dev = 0.8;
    double surround_ratio = kDefaultSurroundRatio;
    int sign = -1;  // +1 on-center, -1 off-center

    // off_midget (5, 0.8), on_midget (11, 1.04), off_parasol (61, 8),
    // on_parasol (243, 10.4).
    static DogKernelSpec preset(CellType type, double surround_ratio = kDefaultSurroundRatio);
};

std::string_view to_string(CellType type);
std::string_view to_string(EdgeMode mode);
// Accepts "off-midget" and "off_midget" spellings; throws UsageError
// listing the presets otherwise.
CellType parse_cell_type(std::string_view name);
EdgeMode parse_edge_mode(std::string_view name);

// weights = sum_k coef_k * taps_k taps_k^T
struct SeparableTerm {
    double coef = 0.0;
    std::vector<double> taps;
};

struct Kernel {
    int dim = 0;
    std::vector<double> weights;  // dim x dim, row-major
    std::vector<SeparableTerm> separable;  // optional rank-k factorization

    double at(int r, int s) const { return weights[static_cast<std::size_t>(r) * dim + s]; }

    // Direct kernel with no factorization. Throws SpecError on even dim.
    static Kernel from_weights(int dim, std::vector<double> weights);
};

Kernel make_dog_kernel(const DogKernelSpec& spec);

// Dense real matrix.
struct Raster {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    Raster() = default;
    Raster(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

// out(i, j) = sum_{r,s} k(r, s) * in(i - c + r, j - c + s), c = (dim - 1) / 2.
// Out-of-range taps read zero (zero_pad) or wrap modulo the raster size
// (circular). Uses the separable factorization when the kernel has one.
// Throws DimensionError when dim > 2 * min(rows, cols) + 1.
Raster filter_frame(const Raster& input, const Kernel& kernel, EdgeMode mode);

// Reference direct evaluation of the same sum.
Raster filter_frame_direct(const Raster& input, const Kernel& kernel, EdgeMode mode);

// 0.05 * max |impulse response|.
double default_event_threshold(const Kernel& kernel);

// Accumulate to signed frames, filter each frame, then emit one event of
// polarity sign(v) per pixel with |v| > threshold at the frame timestamp.
EventStream filter_stream(const EventStream& stream, const DogKernelSpec& spec, EdgeMode mode,
                          std::uint64_t frame_period_us, std::optional<double> event_threshold = std::nullopt);

// "dim" header line followed by dim rows of comma-separated weights.
void export_kernel_csv(const Kernel& kernel, std::ostream& sink);

}  // namespace foveal
