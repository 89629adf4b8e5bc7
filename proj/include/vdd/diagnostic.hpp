#pragma once

#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace vdd
{

struct Span
{
    int line = 0;
    int column = 0;

    friend bool operator==( const Span&, const Span& ) = default;
};

enum class Severity
{
    error,
    warning,
    note,
};

std::string_view to_string( Severity severity );

// A diagnostic is a value, never thrown. Checks return lists of these; the
// exception types below are reserved for conditions that stop an operation.
struct Diagnostic
{
    std::string code;
    Severity severity = Severity::error;
    std::string message;
    Span span;
    std::string file;

    friend bool operator==( const Diagnostic&, const Diagnostic& ) = default;
};

using Diagnostics = std::vector< Diagnostic >;

Diagnostic make_error( std::string code, std::string message, Span span = {} );

bool has_errors( const Diagnostics& diagnostics );

// file:line:col: error E-XXX-000: message
std::string format( const Diagnostic& diagnostic );

std::ostream& operator<<( std::ostream& out, const Diagnostic& diagnostic );

class Error : public std::runtime_error
{
    std::string _code;
    Span _span;
    std::string _file;

public:
    Error( std::string code, const std::string& message, Span span = {}, std::string file = {} );

    [[nodiscard]] const std::string& code() const { return _code; }
    [[nodiscard]] const Span& span() const { return _span; }
    [[nodiscard]] const std::string& file() const { return _file; }

    [[nodiscard]] Diagnostic diagnostic() const;

    // Returns a copy tagged with a file name, keeping code and position.
    [[nodiscard]] Error in_file( const std::string& file ) const;
};

struct ParseError : Error
{
    using Error::Error;
};

} // namespace vdd
