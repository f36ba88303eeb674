#pragma once

#include <stdexcept>
#include <string>

namespace lrkit {

/// A caller violated an operation's precondition.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A mathematical invariant failed (overloaded skeleton, singular system,
/// non-terminating extension loop, ...).
class InvariantError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file or text.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lrkit
