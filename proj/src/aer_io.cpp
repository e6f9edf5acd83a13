#include "foveal/aer_io.hpp"

#include <fstream>
#include <limits>
#include <ostream>

#include "foveal/byte_io.hpp"
#include "foveal/errors.hpp"

namespace foveal {

using detail::LeReader;
using detail::LeWriter;

std::uint64_t write_events(const EventStream& stream, std::ostream& sink) {
    LeWriter w(sink);
    w.bytes("AER1", 4);
    w.put<std::uint16_t>(stream.width);
    w.put<std::uint16_t>(stream.height);
    w.put<std::uint64_t>(stream.events.size());
    for (const DvsEvent& e : stream.events) {
        w.put<std::uint64_t>(e.t_us);
        w.put<std::uint16_t>(e.x);
        w.put<std::uint16_t>(e.y);
        w.put<std::int8_t>(e.polarity);
    }
    return w.written();
}

EventStream read_events(std::istream& source) {
    LeReader r(source);
    r.expect_magic("AER1");
    EventStream s;
    s.width = r.get<std::uint16_t>("width");
    s.height = r.get<std::uint16_t>("height");
    if (s.width == 0 || s.height == 0) throw FormatError("AER1 header has zero dimension");
    const auto n = r.get<std::uint64_t>("event_count");

    // Grow incrementally so a corrupt count cannot force a huge allocation.
    constexpr std::uint64_t kReserveCap = 1u << 20;
    s.events.reserve(static_cast<std::size_t>(std::min(n, kReserveCap)));
    for (std::uint64_t i = 0; i < n; ++i) {
        DvsEvent e;
        e.t_us = r.get<std::uint64_t>("event record");
        e.x = r.get<std::uint16_t>("event record");
        e.y = r.get<std::uint16_t>("event record");
        e.polarity = r.get<std::int8_t>("event record");
        s.events.push_back(e);
    }

    const auto violations = validate(s);
    if (!violations.empty()) {
        std::vector<std::string> text;
        text.reserve(violations.size());
        for (const auto& v : violations) text.push_back(v.description);
        throw CorruptStreamError(std::move(text));
    }
    return s;
}

std::uint64_t write_frames(const FrameTensor& frames, std::ostream& sink) {
    if (frames.values.size() != static_cast<std::size_t>(frames.count) * frames.frame_size())
        throw ShapeError("frame tensor payload does not match its dimensions");
    LeWriter w(sink);
    w.bytes("FRM1", 4);
    w.put<std::uint32_t>(frames.count);
    w.put<std::uint32_t>(frames.height);
    w.put<std::uint32_t>(frames.width);
    for (float v : frames.values) w.put_f32(v);
    return w.written();
}

FrameTensor read_frames(std::istream& source) {
    LeReader r(source);
    r.expect_magic("FRM1");
    FrameTensor t;
    t.count = r.get<std::uint32_t>("count");
    t.height = r.get<std::uint32_t>("height");
    t.width = r.get<std::uint32_t>("width");
    const std::uint64_t n = static_cast<std::uint64_t>(t.count) * t.height * t.width;
    constexpr std::uint64_t kReserveCap = 1u << 24;
    t.values.reserve(static_cast<std::size_t>(std::min(n, kReserveCap)));
    for (std::uint64_t i = 0; i < n; ++i) t.values.push_back(r.get_f32("frame payload"));
    return t;
}

std::uint64_t export_csv(const EventStream& stream, std::ostream& sink) {
    sink << "t_us,x,y,neuron,polarity\n";
    std::uint64_t rows = 0;
    for (const DvsEvent& e : stream.events) {
        sink << e.t_us << ',' << e.x << ',' << e.y << ',' << neuron_index(stream, e) << ','
             << int{e.polarity} << '\n';
        if (!sink) throw IoError("csv write failed", rows);
        ++rows;
    }
    if (!sink) throw IoError("csv write failed", rows);
    return rows;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing", 0);
    return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string(), 0);
    return is;
}

}  // namespace

void save_events(const EventStream& stream, const std::filesystem::path& path) {
    auto os = open_out(path);
    const auto n = write_events(stream, os);
    os.flush();
    if (!os) throw IoError("flush failed for " + path.string(), n);
}

EventStream load_events(const std::filesystem::path& path) {
    auto is = open_in(path);
    return read_events(is);
}

void save_frames(const FrameTensor& frames, const std::filesystem::path& path) {
    auto os = open_out(path);
    const auto n = write_frames(frames, os);
    os.flush();
    if (!os) throw IoError("flush failed for " + path.string(), n);
}

FrameTensor load_frames(const std::filesystem::path& path) {
    auto is = open_in(path);
    return read_frames(is);
}

}  // namespace foveal
