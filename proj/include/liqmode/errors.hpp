#pragma once

#include <stdexcept>
#include <string>

namespace liqmode {

// Root of every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad parameter or config value. The message names the field.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Malformed input row.
class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t row, const std::string& what)
        : Error(source + ":" + std::to_string(row) + ": " + what), row_(row) {}

    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

// Input data is absent or unusable (missing file, empty universe, ...).
class DataError : public Error {
public:
    using Error::Error;
};

// A pipeline stage needs an artifact an earlier stage has not produced.
class MissingArtifactError : public Error {
public:
    using Error::Error;
};

// The computation ran but the result is unusable (e.g. an empty label class).
class DegenerateError : public Error {
public:
    using Error::Error;
};

}  // namespace liqmode
