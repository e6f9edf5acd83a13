#include "foveal/framing.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "foveal/errors.hpp"
#include "foveal/rng.hpp"
#include "foveal/stimulus.hpp"

namespace foveal {

FrameTensor accumulate(const EventStream& stream, std::uint64_t frame_period_us, std::size_t min_frames) {
    if (frame_period_us == 0) throw ParameterError("frame_period_us must be positive");
    std::size_t count = 0;
    if (!stream.events.empty()) {
        std::uint64_t t_max = 0;
        for (const DvsEvent& e : stream.events) t_max = std::max(t_max, e.t_us);
        count = static_cast<std::size_t>(t_max / frame_period_us + 1);
    }
    count = std::max(count, min_frames);

    FrameTensor out(static_cast<std::uint32_t>(count), stream.height, stream.width);
    for (const DvsEvent& e : stream.events) {
        if (e.x >= stream.width || e.y >= stream.height) throw DataError("event outside the sensor");
        out.at(e.t_us / frame_period_us, e.y, e.x) += static_cast<float>(e.polarity);
    }
    return out;
}

FrameTensor normalize(FrameTensor frames) {
    float peak = 0.0f;
    for (float v : frames.values) peak = std::max(peak, std::abs(v));
    if (peak > 1.0f) {
        for (float& v : frames.values) v /= peak;
    }
    return frames;
}

FrameTensor downsample(const FrameTensor& frames, std::uint32_t factor) {
    if (factor == 0 || frames.height % factor != 0 || frames.width % factor != 0)
        throw DimensionError("downsample factor must divide both frame dimensions");
    if (factor == 1) return frames;
    FrameTensor out(frames.count, frames.height / factor, frames.width / factor);
    const float scale = 1.0f / static_cast<float>(factor * factor);
    for (std::size_t k = 0; k < frames.count; ++k) {
        for (std::size_t y = 0; y < out.height; ++y) {
            for (std::size_t x = 0; x < out.width; ++x) {
                float acc = 0.0f;
                for (std::size_t dy = 0; dy < factor; ++dy)
                    for (std::size_t dx = 0; dx < factor; ++dx) acc += frames.at(k, y * factor + dy, x * factor + dx);
                out.at(k, y, x) = acc * scale;
            }
        }
    }
    return out;
}

std::vector<std::size_t> Dataset::indices(Split which) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < split.size(); ++i)
        if (split[i] == which) out.push_back(i);
    return out;
}

Dataset build_dataset(std::span<const Recording> recordings, std::uint64_t frame_period_us, std::uint64_t seed,
                      std::size_t min_frames_per_recording) {
    std::array<bool, kNumClasses> present{};
    for (const Recording& r : recordings) {
        if (r.label < 0 || r.label >= kNumClasses) throw RangeError("label outside 0..6");
        present[static_cast<std::size_t>(r.label)] = true;
    }
    for (int c = 0; c < kNumClasses; ++c) {
        if (!present[static_cast<std::size_t>(c)])
            throw CoverageError("no recording carries label " + std::to_string(c));
    }

    Dataset ds;
    ds.seed = seed;
    for (const Recording& r : recordings) {
        FrameTensor f = normalize(accumulate(r.stream, frame_period_us, min_frames_per_recording));
        if (ds.frames.count == 0 && ds.frames.values.empty()) {
            ds.frames.height = f.height;
            ds.frames.width = f.width;
        } else if (f.count > 0 && (f.height != ds.frames.height || f.width != ds.frames.width)) {
            throw DimensionError("recordings have different sensor sizes");
        }
        ds.frames.values.insert(ds.frames.values.end(), f.values.begin(), f.values.end());
        ds.frames.count += f.count;
        ds.labels.insert(ds.labels.end(), f.count, r.label);
    }

    ds.split.assign(ds.labels.size(), Split::train);
    Rng rng(seed);
    for (int c = 0; c < kNumClasses; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < ds.labels.size(); ++i)
            if (ds.labels[i] == c) members.push_back(i);
        if (members.empty())
            throw CoverageError("label " + std::to_string(c) + " produced no frames");
        rng.shuffle(std::span<std::size_t>(members));
        const std::size_t n_test = std::max<std::size_t>(1, members.size() / 10);
        for (std::size_t i = members.size() - n_test; i < members.size(); ++i) ds.split[members[i]] = Split::test;
    }
    return ds;
}

void write_split_csv(const Dataset& ds, std::ostream& sink) {
    sink << "frame_idx,label,split\n";
    for (std::size_t i = 0; i < ds.labels.size(); ++i) {
        sink << i << ',' << ds.labels[i] << ',' << (ds.split[i] == Split::test ? "test" : "train") << '\n';
    }
    if (!sink) throw IoError("split csv write failed", 0);
}

Dataset read_split_csv(std::istream& source, FrameTensor frames) {
    Dataset ds;
    std::string line;
    if (!std::getline(source, line) || line != "frame_idx,label,split")
        throw FormatError("split csv lacks the frame_idx,label,split header");
    std::size_t expected = 0;
    while (std::getline(source, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string idx, label, split;
        if (!std::getline(row, idx, ',') || !std::getline(row, label, ',') || !std::getline(row, split))
            throw FormatError("malformed split csv row: " + line);
        if (std::stoull(idx) != expected) throw FormatError("split csv rows out of order at " + idx);
        const int l = std::stoi(label);
        if (l < 0 || l >= kNumClasses) throw FormatError("split csv label outside 0..6");
        if (split != "train" && split != "test") throw FormatError("unknown split '" + split + "'");
        ds.labels.push_back(l);
        ds.split.push_back(split == "test" ? Split::test : Split::train);
        ++expected;
    }
    if (ds.labels.size() != frames.count)
        throw ValidationError("split csv has " + std::to_string(ds.labels.size()) + " rows for " +
                              std::to_string(frames.count) + " frames");
    ds.frames = std::move(frames);
    return ds;
}

}  // namespace foveal
