#pragma once

#include <stdexcept>
#include <string>

namespace cansig {

// Recoverable input/configuration problems. The CLI maps these to exit
// code 1; anything derived from std::logic_error surfaces as exit code 2.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// I/O failure while reading a capture or config file.
class UnreadableInput : public InputError {
public:
    using InputError::InputError;
};

// Input text does not look like the requested log format
// (more than half of the lines failed to parse).
class FormatError : public InputError {
public:
    using InputError::InputError;
};

// Too few diagnostic samples fall inside the token trace's time span.
class InsufficientOverlap : public InputError {
public:
    using InputError::InputError;
};

// Capture contains no diagnostic trace that overlaps any broadcast trace.
class NoUsableDiagnostics : public InputError {
public:
    using InputError::InputError;
};

// Generator layout places two signals on overlapping bit ranges.
class LayoutOverlap : public InputError {
public:
    using InputError::InputError;
};

// A channel's value range does not fit the configured token width.
class RangeOverflow : public InputError {
public:
    using InputError::InputError;
};

// Report/truth document is missing required fields or has the wrong version.
class SchemaMismatch : public InputError {
public:
    using InputError::InputError;
};

// Exhaustive packing oracle refused an oversized candidate set.
class TooManyCandidates : public InputError {
public:
    using InputError::InputError;
};

}  // namespace cansig
