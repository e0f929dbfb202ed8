#pragma once

#include <stdexcept>
#include <string>

namespace genai {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FileMissing : Error {
    explicit FileMissing(const std::string& path) : Error("file not found: " + path) {}
};

struct EncodingError : Error {
    EncodingError(const std::string& path, std::size_t offset)
        : Error("invalid UTF-8 in " + path + " at byte " + std::to_string(offset)) {}
};

}  // namespace genai
