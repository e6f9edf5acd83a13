#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace foveal {

// Root of every error thrown by the library. Each subclass names the
// failure category so callers (and the CLI) can map it to an exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class SpecError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class LengthError : public Error {
public:
    using Error::Error;
};

class CoverageError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

class UsageError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class CorruptStreamError : public Error {
public:
    explicit CorruptStreamError(std::vector<std::string> violations)
        : Error(summarize(violations)), violations_(std::move(violations)) {}

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    static std::string summarize(const std::vector<std::string>& v) {
        std::string msg = "corrupt event stream (" + std::to_string(v.size()) + " violations)";
        if (!v.empty()) msg += ": " + v.front();
        return msg;
    }

    std::vector<std::string> violations_;
};

class IoError : public Error {
public:
    IoError(const std::string& what, std::uint64_t bytes_written)
        : Error(what + " after " + std::to_string(bytes_written) + " bytes"),
          bytes_written_(bytes_written) {}

    std::uint64_t bytes_written() const noexcept { return bytes_written_; }

private:
    std::uint64_t bytes_written_;
};

}  // namespace foveal
