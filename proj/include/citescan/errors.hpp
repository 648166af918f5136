#pragma once

#include <stdexcept>
#include <string>

namespace citescan {

// Data-level failures. CLI maps these to exit code 2.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyCorpus : DataError {
    EmptyCorpus() : DataError("empty corpus") {}
    explicit EmptyCorpus(const std::string& what) : DataError(what) {}
};

struct DegenerateCorpus : DataError {
    using DataError::DataError;
};

struct IoError : DataError {
    using DataError::DataError;
};

struct ParseError : DataError {
    using DataError::DataError;
};

struct OffsetOutOfBounds : DataError {
    using DataError::DataError;
};

struct LexiconMissing : DataError {
    using DataError::DataError;
};

struct SampleTooLarge : DataError {
    using DataError::DataError;
};

struct LengthMismatch : DataError {
    using DataError::DataError;
};

struct TooFewItems : DataError {
    using DataError::DataError;
};

struct EmptySpans : DataError {
    EmptySpans() : DataError("no spans given") {}
};

// Structured warnings go to stderr; never throws.
void log_warn(const std::string& message);
void log_info(const std::string& message);

}  // namespace citescan
