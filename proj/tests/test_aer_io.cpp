#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <random>
#include <sstream>

#include "foveal/aer_io.hpp"
#include "foveal/errors.hpp"
#include "foveal/stimulus.hpp"

using namespace foveal;

namespace {

std::string bytes_of(const EventStream& s) {
    std::ostringstream os;
    write_events(s, os);
    return os.str();
}

// Little-endian decode, written independently of the library readers.
std::uint64_t le(const std::string& b, std::size_t at, int n) {
    std::uint64_t v = 0;
    for (int i = n - 1; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[at + i]);
    return v;
}

// Accepts `limit` bytes and then fails.
class LimitedBuf : public std::streambuf {
public:
    explicit LimitedBuf(std::size_t limit) : left_(limit) {}

protected:
    int_type overflow(int_type ch) override {
        if (left_ == 0) return traits_type::eof();
        --left_;
        return ch;
    }
    std::streamsize xsputn(const char*, std::streamsize n) override {
        const auto take = std::min<std::streamsize>(n, static_cast<std::streamsize>(left_));
        left_ -= static_cast<std::size_t>(take);
        return take;
    }

private:
    std::size_t left_;
};

EventStream random_sorted(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    EventStream s;
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < n; ++i) {
        t += gen() % 3;
        s.events.push_back({t, static_cast<std::uint16_t>(gen() % 128), static_cast<std::uint16_t>(gen() % 128),
                            static_cast<std::int8_t>(gen() % 2 ? 1 : -1)});
    }
    return s;
}

}  // namespace

TEST(WriteEvents, EmptyStreamIsHeaderOnly) {
    const std::string b = bytes_of(EventStream{});
    ASSERT_EQ(b.size(), 16u);
    EXPECT_EQ(b.substr(0, 4), "AER1");
    EXPECT_EQ(le(b, 4, 2), 128u);
    EXPECT_EQ(le(b, 6, 2), 128u);
    EXPECT_EQ(le(b, 8, 8), 0u);
}

TEST(WriteEvents, SingleEventLayout) {
    EventStream s;
    s.events = {{0x0102030405060708ull, 300, 7, -1}};
    const std::string b = bytes_of(s);
    ASSERT_EQ(b.size(), 29u);
    EXPECT_EQ(le(b, 8, 8), 1u);
    EXPECT_EQ(le(b, 16, 8), 0x0102030405060708ull);
    EXPECT_EQ(le(b, 24, 2), 300u);
    EXPECT_EQ(le(b, 26, 2), 7u);
    EXPECT_EQ(static_cast<unsigned char>(b[28]), 0xFFu);
}

TEST(WriteEvents, SizeIsAffineAndRoundTripsRecording) {
    const EventStream s = generate_recording(1, {}, 12).stream;
    std::ostringstream os;
    const std::uint64_t n = write_events(s, os);
    EXPECT_EQ(n, 16 + 13 * s.events.size());
    EXPECT_EQ(os.str().size(), n);
    std::istringstream is(os.str());
    EXPECT_EQ(read_events(is), s);
}

TEST(WriteEvents, SinkFailureReportsBytesWritten) {
    LimitedBuf buf(20);
    std::ostream os(&buf);
    try {
        write_events(random_sorted(5, 1), os);
        FAIL() << "expected IoError";
    } catch (const IoError& e) {
        EXPECT_LE(e.bytes_written(), 20u);
    }
}

TEST(ReadEvents, BadMagic) {
    std::istringstream is(std::string("XXXX") + std::string(12, '\0'));
    EXPECT_THROW(read_events(is), FormatError);
}

TEST(ReadEvents, TruncatedPayload) {
    std::string b = bytes_of(random_sorted(5, 2));
    b.resize(16 + 13 * 4);
    std::istringstream is(b);
    EXPECT_THROW(read_events(is), LengthError);
    std::istringstream header_only(b.substr(0, 10));
    EXPECT_THROW(read_events(header_only), LengthError);
}

TEST(ReadEvents, CorruptStreamListsViolations) {
    EventStream s;
    s.events = {{10, 0, 0, 1}, {4, 0, 0, 1}, {11, 200, 0, 1}};
    std::istringstream is(bytes_of(s));
    try {
        read_events(is);
        FAIL() << "expected CorruptStreamError";
    } catch (const CorruptStreamError& e) {
        EXPECT_EQ(e.violations().size(), 2u);
    }
}

TEST(Frames, EmptyTensorHeader) {
    std::ostringstream os;
    EXPECT_EQ(write_frames(FrameTensor(0, 5, 6), os), 16u);
    const std::string b = os.str();
    EXPECT_EQ(b.substr(0, 4), "FRM1");
    EXPECT_EQ(le(b, 4, 4), 0u);
    EXPECT_EQ(le(b, 8, 4), 5u);
    EXPECT_EQ(le(b, 12, 4), 6u);
}

TEST(Frames, ZeroFrameBytes) {
    std::ostringstream os;
    write_frames(FrameTensor(1, 2, 2), os);
    const std::string b = os.str();
    ASSERT_EQ(b.size(), 32u);
    EXPECT_EQ(b.substr(16), std::string(16, '\0'));
}

TEST(Frames, RandomTensorRoundTripsBitwise) {
    FrameTensor t(3, 128, 128);
    std::mt19937 gen(4);
    std::normal_distribution<float> d(0.0f, 3.0f);
    for (float& v : t.values) v = d(gen);
    t.values[5] = -0.0f;
    std::ostringstream os;
    write_frames(t, os);
    std::istringstream is(os.str());
    const FrameTensor r = read_frames(is);
    ASSERT_EQ(r.count, 3u);
    ASSERT_EQ(r.values.size(), t.values.size());
    EXPECT_EQ(std::memcmp(r.values.data(), t.values.data(), t.values.size() * sizeof(float)), 0);
}

TEST(Frames, BadMagicAndTruncation) {
    std::ostringstream os;
    write_frames(FrameTensor(2, 3, 3), os);
    std::string b = os.str();
    std::istringstream shortened(b.substr(0, b.size() - 1));
    EXPECT_THROW(read_frames(shortened), LengthError);
    b[0] = 'Z';
    std::istringstream bad(b);
    EXPECT_THROW(read_frames(bad), FormatError);
}

TEST(ExportCsv, HeaderAndRows) {
    std::ostringstream empty;
    EXPECT_EQ(export_csv(EventStream{}, empty), 0u);
    EXPECT_EQ(empty.str(), "t_us,x,y,neuron,polarity\n");

    EventStream s;
    s.events = {{5, 1, 2, 1}, {6, 0, 0, -1}};
    std::ostringstream os;
    EXPECT_EQ(export_csv(s, os), 2u);
    EXPECT_EQ(os.str(), "t_us,x,y,neuron,polarity\n5,1,2,257,1\n6,0,0,0,-1\n");
}

TEST(ExportCsv, RowCountMatchesRecording) {
    const EventStream s = generate_recording(0, {}, 10).stream;
    std::ostringstream os;
    const std::uint64_t rows = export_csv(s, os);
    std::size_t lines = 0;
    for (char c : os.str()) lines += c == '\n';
    EXPECT_EQ(rows, s.events.size());
    EXPECT_EQ(lines, s.events.size() + 1);
}

TEST(Files, SaveLoadBothFormats) {
    const auto dir = std::filesystem::temp_directory_path() / "foveal_test_aer_io";
    std::filesystem::create_directories(dir);
    const EventStream s = random_sorted(100, 5);
    save_events(s, dir / "a.aer");
    EXPECT_EQ(std::filesystem::file_size(dir / "a.aer"), 16u + 13u * 100u);
    EXPECT_EQ(load_events(dir / "a.aer"), s);
    FrameTensor t(2, 4, 4);
    t.values[3] = 1.5f;
    save_frames(t, dir / "a.frm");
    EXPECT_EQ(load_frames(dir / "a.frm"), t);
    EXPECT_THROW(load_events(dir / "missing.aer"), Error);
    std::filesystem::remove_all(dir);
}
