#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace foveal {

inline constexpr std::uint16_t kSensorSize = 128;

// One polarity spike. Origin is top-left: x is the column, y the row.
struct DvsEvent {
    std::uint64_t t_us = 0;
    std::uint16_t x = 0;
    std::uint16_t y = 0;
    std::int8_t polarity = 1;  // +1 ON, -1 OFF

    friend bool operator==(const DvsEvent&, const DvsEvent&) = default;
};

struct EventStream {
    std::uint16_t width = kSensorSize;
    std::uint16_t height = kSensorSize;
    std::vector<DvsEvent> events;

    friend bool operator==(const EventStream&, const EventStream&) = default;
};

// A recording tagged with its class label (0..6).
struct Recording {
    EventStream stream;
    int label = 0;
};

struct Violation {
    std::size_t index;
    std::string description;
};

// Reports every out-of-bounds coordinate, zero/invalid polarity and
// timestamp inversion. Never throws; an empty result means valid.
std::vector<Violation> validate(const EventStream& stream);

// Stable sort by timestamp.
EventStream sort_events(EventStream stream);

struct PolarityCounts {
    std::size_t on = 0;
    std::size_t off = 0;

    friend bool operator==(const PolarityCounts&, const PolarityCounts&) = default;
};

PolarityCounts polarity_counts(const EventStream& stream);

// Flat raster-plot neuron index, y * width + x.
inline std::uint32_t neuron_index(const EventStream& stream, const DvsEvent& e) {
    return static_cast<std::uint32_t>(e.y) * stream.width + e.x;
}

}  // namespace foveal
