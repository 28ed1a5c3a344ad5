#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sftsim {

enum class ErrorKind {
    MissingLayer,
    OrderTooLarge,
    WindowTooLarge,
    InvalidWindow,
    NotFound,
    CellTooSmall,
    Overflow,
    ProductTooLarge,
    DimensionMismatch,
    LengthMismatch,
    ParseError,
    UnsupportedLayer,
    OracleRejection,
    BudgetExceeded,
    InconsistentBits,
    BoundExceeded,
    InvalidArgument,
};

inline const char* to_string(ErrorKind k)
{
    switch (k) {
    case ErrorKind::MissingLayer: return "MissingLayer";
    case ErrorKind::OrderTooLarge: return "OrderTooLarge";
    case ErrorKind::WindowTooLarge: return "WindowTooLarge";
    case ErrorKind::InvalidWindow: return "InvalidWindow";
    case ErrorKind::NotFound: return "NotFound";
    case ErrorKind::CellTooSmall: return "CellTooSmall";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::ProductTooLarge: return "ProductTooLarge";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::UnsupportedLayer: return "UnsupportedLayer";
    case ErrorKind::OracleRejection: return "OracleRejection";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::InconsistentBits: return "InconsistentBits";
    case ErrorKind::BoundExceeded: return "BoundExceeded";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
    {
    }
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// line and column are 1-based
class ParseError : public Error {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& what)
        : Error(ErrorKind::ParseError,
                "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
          line_(line), column_(column)
    {
    }
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

} // namespace sftsim
