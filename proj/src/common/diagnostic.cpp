#include "vdd/diagnostic.hpp"

#include <algorithm>
#include <sstream>

namespace vdd
{

std::string_view to_string( Severity severity )
{
    switch ( severity )
    {
    case Severity::error:
        return "error";
    case Severity::warning:
        return "warning";
    case Severity::note:
        return "note";
    }
    return "error";
}

Diagnostic make_error( std::string code, std::string message, Span span )
{
    return Diagnostic{ std::move( code ), Severity::error, std::move( message ), span, {} };
}

bool has_errors( const Diagnostics& diagnostics )
{
    return std::any_of( diagnostics.begin(), diagnostics.end(),
                        []( const Diagnostic& d ) { return d.severity == Severity::error; } );
}

std::string format( const Diagnostic& diagnostic )
{
    std::ostringstream out;
    if ( !diagnostic.file.empty() )
        out << diagnostic.file << ':' << diagnostic.span.line << ':' << diagnostic.span.column << ": ";
    else if ( diagnostic.span.line > 0 )
        out << diagnostic.span.line << ':' << diagnostic.span.column << ": ";
    out << to_string( diagnostic.severity ) << ' ' << diagnostic.code << ": " << diagnostic.message;
    return out.str();
}

std::ostream& operator<<( std::ostream& out, const Diagnostic& diagnostic )
{
    return out << format( diagnostic );
}

Error::Error( std::string code, const std::string& message, Span span, std::string file )
    : std::runtime_error( code + ": " + message ),
      _code{ std::move( code ) },
      _span{ span },
      _file{ std::move( file ) }
{
}

Diagnostic Error::diagnostic() const
{
    std::string message = what();
    // what() carries the code as a prefix; the diagnostic stores it separately.
    if ( message.rfind( _code + ": ", 0 ) == 0 )
        message.erase( 0, _code.size() + 2 );
    return Diagnostic{ _code, Severity::error, message, _span, _file };
}

Error Error::in_file( const std::string& file ) const
{
    auto d = diagnostic();
    return Error{ _code, d.message, _span, file };
}

} // namespace vdd
