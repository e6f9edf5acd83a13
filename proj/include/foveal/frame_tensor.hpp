#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace foveal {

// Read-only view of one frame, row-major.
struct FrameView {
    std::uint32_t height = 0;
    std::uint32_t width = 0;
    std::span<const float> values;

    float at(std::size_t y, std::size_t x) const { return values[y * width + x]; }
};

// Frame-major stack of equally sized real frames.
struct FrameTensor {
    std::uint32_t count = 0;
    std::uint32_t height = 0;
    std::uint32_t width = 0;
    std::vector<float> values;

    FrameTensor() = default;
    FrameTensor(std::uint32_t n, std::uint32_t h, std::uint32_t w)
        : count(n), height(h), width(w), values(static_cast<std::size_t>(n) * h * w, 0.0f) {}

    std::size_t frame_size() const { return static_cast<std::size_t>(height) * width; }

    float& at(std::size_t k, std::size_t y, std::size_t x) { return values[k * frame_size() + y * width + x]; }
    float at(std::size_t k, std::size_t y, std::size_t x) const { return values[k * frame_size() + y * width + x]; }

    FrameView frame(std::size_t k) const {
        return {height, width, std::span<const float>(values).subspan(k * frame_size(), frame_size())};
    }

    friend bool operator==(const FrameTensor&, const FrameTensor&) = default;
};

}  // namespace foveal
