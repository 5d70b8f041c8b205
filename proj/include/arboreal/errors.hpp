#pragma once

#include <stdexcept>
#include <string>

namespace arboreal {

/// Base class for every error raised by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two structures (or a structure and a query) disagree on the vocabulary.
class vocabulary_mismatch : public error {
public:
    using error::error;
};

/// An operation was called on input violating its documented precondition.
class precondition_failed : public error {
public:
    using error::error;
};

/// The query is well-formed but deliberately not supported (e.g. pebble iso).
class unsupported_query : public error {
public:
    using error::error;
};

/// A configurable resource guard (node or formula budget) was exceeded.
class budget_exceeded : public error {
public:
    using error::error;
};

class parse_error : public error {
public:
    parse_error(int line, int column, const std::string & what) :
        error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line),
        column_(column)
    {
    }

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

} // namespace arboreal
