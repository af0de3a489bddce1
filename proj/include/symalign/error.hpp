#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace symalign {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A document did not match its schema. The message names the field path,
/// e.g. `onsets[2].beat`.
class SchemaError : public Error {
public:
    SchemaError(const std::string& field, const std::string& what)
        : Error(field + ": " + what), field_(field) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Malformed binary input (MIDI, weight files). Carries the byte offset at
/// which decoding failed.
class ParseError : public Error {
public:
    ParseError(std::size_t offset, const std::string& what)
        : Error("byte " + std::to_string(offset) + ": " + what), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace symalign
