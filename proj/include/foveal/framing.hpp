#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "foveal/events.hpp"
#include "foveal/frame_tensor.hpp"

namespace foveal {

// Signed per-pixel tallies (ON minus OFF) over windows
// [k*P, (k+1)*P). The natural frame count is ceil((t_max + 1) / P), or 0
// for an empty stream; min_frames pads the tail with empty frames so a
// silent recording still spans its nominal duration.
FrameTensor accumulate(const EventStream& stream, std::uint64_t frame_period_us, std::size_t min_frames = 0);

// Scales the whole tensor by 1 / max(1, max|value|).
FrameTensor normalize(FrameTensor frames);

// Block mean over factor x factor tiles; dimensions must divide evenly.
FrameTensor downsample(const FrameTensor& frames, std::uint32_t factor);

enum class Split : std::uint8_t { train, test };

struct Dataset {
    FrameTensor frames;
    std::vector<int> labels;
    std::vector<Split> split;
    std::uint64_t seed = 0;

    std::vector<std::size_t> indices(Split which) const;
};

// Accumulates and normalizes every recording on its own, concatenates the
// frames in input order, then holds out the last floor(n/10) (at least one)
// frames of each class after a seeded per-class shuffle.
Dataset build_dataset(std::span<const Recording> recordings, std::uint64_t frame_period_us, std::uint64_t seed,
                      std::size_t min_frames_per_recording = 0);

// Sidecar "frame_idx,label,split" table.
void write_split_csv(const Dataset& ds, std::ostream& sink);
// Reads the sidecar back into labels/split; frames come from the FRM1 file.
Dataset read_split_csv(std::istream& source, FrameTensor frames);

}  // namespace foveal
