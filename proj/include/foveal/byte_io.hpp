#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

#include "foveal/errors.hpp"

namespace foveal::detail {

// Little-endian fixed-width writer that tracks bytes emitted so a failing
// sink can report how far it got.
class LeWriter {
public:
    explicit LeWriter(std::ostream& os) : os_(os) {}

    void bytes(const char* p, std::size_t n) {
        os_.write(p, static_cast<std::streamsize>(n));
        if (!os_) throw IoError("write failed", written_);
        written_ += n;
    }

    template <typename T>
    void put(T v) {
        static_assert(std::is_integral_v<T>);
        std::array<char, sizeof(T)> buf{};
        using U = std::make_unsigned_t<T>;
        auto u = static_cast<U>(v);
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            buf[i] = static_cast<char>(static_cast<std::uint8_t>(u >> (8 * i)));
        }
        bytes(buf.data(), buf.size());
    }

    void put_f32(float f) { put(std::bit_cast<std::uint32_t>(f)); }

    std::uint64_t written() const { return written_; }

private:
    std::ostream& os_;
    std::uint64_t written_ = 0;
};

class LeReader {
public:
    explicit LeReader(std::istream& is) : is_(is) {}

    // Returns false on clean EOF before any byte of this read.
    bool try_bytes(char* p, std::size_t n) {
        is_.read(p, static_cast<std::streamsize>(n));
        return static_cast<std::size_t>(is_.gcount()) == n;
    }

    template <typename T>
    T get(const char* what) {
        std::array<char, sizeof(T)> buf{};
        if (!try_bytes(buf.data(), buf.size())) throw LengthError(std::string("truncated input reading ") + what);
        using U = std::make_unsigned_t<T>;
        U u = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            u |= static_cast<U>(static_cast<U>(static_cast<std::uint8_t>(buf[i])) << (8 * i));
        }
        return static_cast<T>(u);
    }

    float get_f32(const char* what) { return std::bit_cast<float>(get<std::uint32_t>(what)); }

    void expect_magic(const char (&magic)[5]) {
        char buf[4] = {};
        if (!try_bytes(buf, 4) || std::memcmp(buf, magic, 4) != 0)
            throw FormatError(std::string("bad magic, expected ") + magic);
    }

private:
    std::istream& is_;
};

}  // namespace foveal::detail
