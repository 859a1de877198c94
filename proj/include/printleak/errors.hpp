#pragma once

#include <stdexcept>
#include <string>

namespace printleak {

// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input text: G-code, CSV, config files. CLI exit code 2.
class ParseError : public Error {
public:
    using Error::Error;
};

// Structurally valid input that violates a semantic precondition
// (non-monotone timestamps, empty toolpath, degenerate frame). Exit code 2.
class DataError : public Error {
public:
    using Error::Error;
};

// Model files and training preconditions (missing class, bad magic,
// truncated stream, dimension mismatch). CLI exit code 3.
class ModelError : public Error {
public:
    using Error::Error;
};

} // namespace printleak
