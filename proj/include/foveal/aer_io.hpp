#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "foveal/events.hpp"
#include "foveal/frame_tensor.hpp"

namespace foveal {

// AER1 layout (little-endian):
//   "AER1" | u16 width | u16 height | u64 event_count
//   then per event: u64 t_us | u16 x | u16 y | i8 polarity
inline constexpr std::uint64_t kAerHeaderBytes = 16;
inline constexpr std::uint64_t kAerRecordBytes = 13;

// FRM1 layout (little-endian):
//   "FRM1" | u32 count | u32 height | u32 width | count*height*width f32
inline constexpr std::uint64_t kFrameHeaderBytes = 16;

std::uint64_t write_events(const EventStream& stream, std::ostream& sink);
EventStream read_events(std::istream& source);

std::uint64_t write_frames(const FrameTensor& frames, std::ostream& sink);
FrameTensor read_frames(std::istream& source);

// Header "t_us,x,y,neuron,polarity"; returns the number of data rows.
std::uint64_t export_csv(const EventStream& stream, std::ostream& sink);

void save_events(const EventStream& stream, const std::filesystem::path& path);
EventStream load_events(const std::filesystem::path& path);
void save_frames(const FrameTensor& frames, const std::filesystem::path& path);
FrameTensor load_frames(const std::filesystem::path& path);

}  // namespace foveal
