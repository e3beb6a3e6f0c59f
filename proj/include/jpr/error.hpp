#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace jpr {

enum class ErrorKind {
    Io,
    Parse,
    Shape,
    InvalidArgument,
    DegenerateFeature,
    DegenerateVariance,
    NonFinite,
    EigenFailure,
    EmptyGrid,
    InfeasibleDegree,
    NotPositiveDefinite,
};

/// Stable lowercase name used in CLI messages ("error: parse: ...").
std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Parse failure with a 1-based row/column location into the source file.
class ParseError : public Error {
public:
    ParseError(std::size_t row, std::size_t col, const std::string& what)
        : Error(ErrorKind::Parse, "row " + std::to_string(row) + ", column " +
                                      std::to_string(col) + ": " + what),
          row_(row), col_(col) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t col() const noexcept { return col_; }

private:
    std::size_t row_;
    std::size_t col_;
};

}  // namespace jpr
