#include "foveal/dog_filters.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "foveal/errors.hpp"
#include "foveal/framing.hpp"

namespace foveal {

namespace {

// Below this side length the direct sum is as cheap as two 1D passes.
constexpr int kSeparableMinDim = 9;

// Unit-mass sampled 1D Gaussian over offsets -c..c. The outer product of
// two of these is the 2D isotropic Gaussian normalized over the square.
std::vector<double> gaussian_taps(int dim, double sigma) {
    const int c = (dim - 1) / 2;
    std::vector<double> g(static_cast<std::size_t>(dim));
    double total = 0.0;
    for (int i = 0; i < dim; ++i) {
        const double d = i - c;
        g[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
        total += g[static_cast<std::size_t>(i)];
    }
    for (double& v : g) v /= total;
    return g;
}

std::size_t wrap(std::ptrdiff_t i, std::size_t n) {
    const auto m = static_cast<std::ptrdiff_t>(n);
    std::ptrdiff_t r = i % m;
    return static_cast<std::size_t>(r < 0 ? r + m : r);
}

void check_geometry(const Raster& input, const Kernel& kernel) {
    if (input.values.size() != input.rows * input.cols) throw DimensionError("raster payload mismatch");
    if (kernel.dim <= 0 || kernel.dim % 2 == 0 ||
        kernel.weights.size() != static_cast<std::size_t>(kernel.dim) * kernel.dim)
        throw DimensionError("kernel must be square with odd side");
    const std::size_t limit = 2 * std::min(input.rows, input.cols) + 1;
    if (static_cast<std::size_t>(kernel.dim) > limit)
        throw DimensionError("kernel side " + std::to_string(kernel.dim) + " exceeds " + std::to_string(limit) +
                             " for a " + std::to_string(input.rows) + "x" + std::to_string(input.cols) + " raster");
}

// out(i) = sum_t taps(t) * in(i - c + t) along one axis.
void correlate_rows(const Raster& in, Raster& out, const std::vector<double>& taps, EdgeMode mode) {
    const auto c = static_cast<std::ptrdiff_t>(taps.size() - 1) / 2;
    const auto cols = static_cast<std::ptrdiff_t>(in.cols);
    for (std::size_t i = 0; i < in.rows; ++i) {
        const double* src = &in.values[i * in.cols];
        double* dst = &out.values[i * in.cols];
        for (std::ptrdiff_t j = 0; j < cols; ++j) {
            double acc = 0.0;
            for (std::size_t t = 0; t < taps.size(); ++t) {
                const std::ptrdiff_t jj = j - c + static_cast<std::ptrdiff_t>(t);
                if (jj >= 0 && jj < cols)
                    acc += taps[t] * src[jj];
                else if (mode == EdgeMode::circular)
                    acc += taps[t] * src[wrap(jj, in.cols)];
            }
            dst[j] = acc;
        }
    }
}

void correlate_cols(const Raster& in, Raster& out, const std::vector<double>& taps, EdgeMode mode) {
    const auto c = static_cast<std::ptrdiff_t>(taps.size() - 1) / 2;
    const auto rows = static_cast<std::ptrdiff_t>(in.rows);
    std::fill(out.values.begin(), out.values.end(), 0.0);
    for (std::ptrdiff_t i = 0; i < rows; ++i) {
        double* dst = &out.values[static_cast<std::size_t>(i) * in.cols];
        for (std::size_t t = 0; t < taps.size(); ++t) {
            std::ptrdiff_t ii = i - c + static_cast<std::ptrdiff_t>(t);
            if (ii < 0 || ii >= rows) {
                if (mode == EdgeMode::zero_pad) continue;
                ii = static_cast<std::ptrdiff_t>(wrap(ii, in.rows));
            }
            const double* src = &in.values[static_cast<std::size_t>(ii) * in.cols];
            const double w = taps[t];
            for (std::size_t j = 0; j < in.cols; ++j) dst[j] += w * src[j];
        }
    }
}

Raster filter_separable(const Raster& input, const Kernel& kernel, EdgeMode mode) {
    Raster out(input.rows, input.cols);
    Raster horiz(input.rows, input.cols);
    Raster both(input.rows, input.cols);
    for (const SeparableTerm& term : kernel.separable) {
        correlate_rows(input, horiz, term.taps, mode);
        correlate_cols(horiz, both, term.taps, mode);
        for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += term.coef * both.values[i];
    }
    return out;
}

}  // namespace

DogKernelSpec DogKernelSpec::preset(CellType type, double surround_ratio) {
    switch (type) {
        case CellType::off_midget:
            return {type, 5, 0.8, surround_ratio, -1};
        case CellType::on_midget:
            return {type, 11, 1.04, surround_ratio, +1};
        case CellType::off_parasol:
            return {type, 61, 8.0, surround_ratio, -1};
        case CellType::on_parasol:
            return {type, 243, 10.4, surround_ratio, +1};
    }
    throw SpecError("unknown cell type");
}

std::string_view to_string(CellType type) {
    switch (type) {
        case CellType::off_midget:
            return "off-midget";
        case CellType::on_midget:
            return "on-midget";
        case CellType::off_parasol:
            return "off-parasol";
        case CellType::on_parasol:
            return "on-parasol";
    }
    return "?";
}

std::string_view to_string(EdgeMode mode) { return mode == EdgeMode::circular ? "circular" : "zero"; }

CellType parse_cell_type(std::string_view name) {
    std::string n(name);
    std::replace(n.begin(), n.end(), '_', '-');
    for (CellType t : {CellType::off_midget, CellType::on_midget, CellType::off_parasol, CellType::on_parasol}) {
        if (n == to_string(t)) return t;
    }
    throw UsageError("unknown cell type '" + std::string(name) +
                     "' (expected off-midget, on-midget, off-parasol or on-parasol)");
}

EdgeMode parse_edge_mode(std::string_view name) {
    if (name == "zero" || name == "zero_pad" || name == "zero-pad") return EdgeMode::zero_pad;
    if (name == "circular") return EdgeMode::circular;
    throw UsageError("unknown edge mode '" + std::string(name) + "' (expected zero or circular)");
}

Kernel Kernel::from_weights(int dim, std::vector<double> weights) {
    if (dim <= 0 || dim % 2 == 0) throw SpecError("kernel side must be odd, got " + std::to_string(dim));
    if (weights.size() != static_cast<std::size_t>(dim) * dim) throw SpecError("kernel weights must be dim x dim");
    return Kernel{dim, std::move(weights), {}};
}

Kernel make_dog_kernel(const DogKernelSpec& spec) {
    if (spec.mat_dim < 3 || spec.mat_dim % 2 == 0)
        throw SpecError("mat_dim must be odd and >= 3, got " + std::to_string(spec.mat_dim));
    if (!(spec.surround_ratio > 1.0)) throw SpecError("surround_ratio must exceed 1");
    if (!(spec.cent_dev > 0.0)) throw SpecError("cent_dev must be positive");
    if (spec.sign != 1 && spec.sign != -1) throw SpecError("sign must be +1 or -1");

    const int dim = spec.mat_dim;
    const auto center = gaussian_taps(dim, spec.cent_dev);
    const auto surround = gaussian_taps(dim, spec.cent_dev * spec.surround_ratio);
    const double sign = spec.sign;

    Kernel k;
    k.dim = dim;
    k.weights.resize(static_cast<std::size_t>(dim) * dim);
    for (int r = 0; r < dim; ++r) {
        for (int s = 0; s < dim; ++s) {
            const auto ri = static_cast<std::size_t>(r);
            const auto si = static_cast<std::size_t>(s);
            k.weights[ri * dim + si] = sign * (center[ri] * center[si] - surround[ri] * surround[si]);
        }
    }
    k.separable = {{sign, center}, {-sign, surround}};
    return k;
}

Raster filter_frame_direct(const Raster& input, const Kernel& kernel, EdgeMode mode) {
    check_geometry(input, kernel);
    const auto rows = static_cast<std::ptrdiff_t>(input.rows);
    const auto cols = static_cast<std::ptrdiff_t>(input.cols);
    const std::ptrdiff_t c = (kernel.dim - 1) / 2;
    Raster out(input.rows, input.cols);
    for (std::ptrdiff_t i = 0; i < rows; ++i) {
        for (std::ptrdiff_t j = 0; j < cols; ++j) {
            double acc = 0.0;
            for (int r = 0; r < kernel.dim; ++r) {
                std::ptrdiff_t ii = i - c + r;
                if (ii < 0 || ii >= rows) {
                    if (mode == EdgeMode::zero_pad) continue;
                    ii = static_cast<std::ptrdiff_t>(wrap(ii, input.rows));
                }
                for (int s = 0; s < kernel.dim; ++s) {
                    std::ptrdiff_t jj = j - c + s;
                    if (jj < 0 || jj >= cols) {
                        if (mode == EdgeMode::zero_pad) continue;
                        jj = static_cast<std::ptrdiff_t>(wrap(jj, input.cols));
                    }
                    acc += kernel.at(r, s) * input.values[static_cast<std::size_t>(ii * cols + jj)];
                }
            }
            out.values[static_cast<std::size_t>(i * cols + j)] = acc;
        }
    }
    return out;
}

Raster filter_frame(const Raster& input, const Kernel& kernel, EdgeMode mode) {
    check_geometry(input, kernel);
    if (!kernel.separable.empty() && kernel.dim >= kSeparableMinDim) return filter_separable(input, kernel, mode);
    return filter_frame_direct(input, kernel, mode);
}

double default_event_threshold(const Kernel& kernel) {
    double peak = 0.0;
    for (double w : kernel.weights) peak = std::max(peak, std::abs(w));
    return 0.05 * peak;
}

EventStream filter_stream(const EventStream& stream, const DogKernelSpec& spec, EdgeMode mode,
                          std::uint64_t frame_period_us, std::optional<double> event_threshold) {
    const Kernel kernel = make_dog_kernel(spec);
    const double threshold = event_threshold.value_or(default_event_threshold(kernel));
    if (!(threshold > 0.0)) throw ParameterError("event_threshold must be positive");

    EventStream out;
    out.width = stream.width;
    out.height = stream.height;
    const FrameTensor frames = accumulate(stream, frame_period_us);

    Raster raster(frames.height, frames.width);
    for (std::size_t k = 0; k < frames.count; ++k) {
        const FrameView view = frames.frame(k);
        bool any = false;
        for (std::size_t p = 0; p < view.values.size(); ++p) {
            raster.values[p] = view.values[p];
            any = any || view.values[p] != 0.0f;
        }
        if (!any) continue;
        const Raster filtered = filter_frame(raster, kernel, mode);
        const std::uint64_t t = static_cast<std::uint64_t>(k) * frame_period_us;
        for (std::size_t y = 0; y < filtered.rows; ++y) {
            for (std::size_t x = 0; x < filtered.cols; ++x) {
                const double v = filtered.at(y, x);
                if (std::abs(v) > threshold) {
                    out.events.push_back({t, static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y),
                                          static_cast<std::int8_t>(v > 0 ? 1 : -1)});
                }
            }
        }
    }
    return out;
}

void export_kernel_csv(const Kernel& kernel, std::ostream& sink) {
    sink << kernel.dim << '\n';
    sink << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (int r = 0; r < kernel.dim; ++r) {
        for (int s = 0; s < kernel.dim; ++s) {
            if (s > 0) sink << ',';
            sink << kernel.at(r, s);
        }
        sink << '\n';
    }
    if (!sink) throw IoError("kernel csv write failed", 0);
}

}  // namespace foveal
