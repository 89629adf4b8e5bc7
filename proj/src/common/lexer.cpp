#include "vdd/lexer.hpp"

#include <array>
#include <cctype>
#include <utility>

namespace vdd
{

namespace
{

// Longest spellings first so that maximal munch falls out of a linear scan.
constexpr std::array< std::string_view, 48 > ascii_punct = {
    "<<|", "<->", "+->", "-->", "|->", "<=>", ":=", "/=", "<=", ">=", "=>", "->",
    "<-",  "<+",  "<|",  "/:",  "<:",  "\\/", "/\\", "..", "(",  ")",  "{",  "}",
    "[",   "]",   ",",   ";",   ":",   ".",   "=",   "<",  ">",  "+",  "-",  "*",
    "/",   "\\",  "&",   "!",   "|",   "@",   "$",   "'",  "?",  "^",  "~",  "%",
};

struct UnicodeAlias
{
    std::string_view utf8;
    std::string_view ascii;
};

constexpr std::array< UnicodeAlias, 33 > unicode_aliases = { {
    { "∧", "&" },      { "∨", "or" },     { "¬", "not" },   { "⇒", "=>" },
    { "⟹", "=>" },     { "⇔", "<=>" },    { "∈", ":" },     { "∉", "/:" },
    { "⊆", "<:" },     { "∪", "\\/" },    { "∩", "/\\" },   { "∖", "\\" },
    { "≠", "/=" },     { "≤", "<=" },     { "≥", ">=" },    { "∀", "forall" },
    { "∃", "exists" }, { "·", "." },      { "×", "*" },     { "÷", "/" },
    { "⊕", "<+" },     { "◁", "<|" },     { "⩤", "<<|" },   { "⇸", "+->" },
    { "→", "-->" },    { "↦", "|->" },    { "ℤ", "INT" },   { "ℕ", "NAT" },
    { "↔", "<->" },    { "←", "<-" },     { "∅", "{}" },    { "ℙ", "POW" },
    { "∘", "." },
} };

bool ident_start( char c )
{
    return std::isalpha( static_cast< unsigned char >( c ) ) || c == '_';
}

bool ident_char( char c )
{
    return std::isalnum( static_cast< unsigned char >( c ) ) || c == '_';
}

// A newline directly after one of these tokens continues the logical line.
bool continues_line( const Token& t )
{
    if ( t.kind == TokenKind::identifier )
        return t.text == "or" || t.text == "not" || t.text == "mod" || t.text == "forall"
            || t.text == "exists";
    if ( t.kind != TokenKind::punct )
        return false;
    static constexpr std::array< std::string_view, 27 > ops = {
        "&", ",", "=>", "<=>", "+", "-", "*", "/", "\\/", "/\\", "\\", "<+", "|->", ":",
        "/:", "<:", "=", "/=", "<", "<=", ">", ">=", "..", ":=", ";", ".", "<<|",
    };
    for ( auto op : ops )
        if ( t.text == op )
            return true;
    return false;
}

} // namespace

std::vector< Token > tokenize( std::string_view src, LexOptions options )
{
    std::vector< Token > out;
    int line = 1;
    int line_start = 0;
    int depth = 0;
    std::size_t i = 0;

    auto span_at = [ & ]( std::size_t pos ) { return Span{ line, static_cast< int >( pos ) - line_start + 1 }; };

    auto push = [ & ]( Token t ) { out.push_back( std::move( t ) ); };

    while ( i < src.size() )
    {
        char c = src[ i ];
        if ( c == '\n' )
        {
            bool suppress = depth > 0 || ( !out.empty() && continues_line( out.back() ) )
                         || out.empty() || out.back().kind == TokenKind::newline;
            if ( options.newlines && !suppress )
                push( Token{ TokenKind::newline, "\n", 0, span_at( i ) } );
            ++i;
            ++line;
            line_start = static_cast< int >( i );
            continue;
        }
        if ( c == ' ' || c == '\t' || c == '\r' )
        {
            ++i;
            continue;
        }
        if ( c == '#' )
        {
            while ( i < src.size() && src[ i ] != '\n' )
                ++i;
            continue;
        }

        Span span = span_at( i );

        if ( ident_start( c ) )
        {
            std::size_t start = i;
            while ( i < src.size() && ident_char( src[ i ] ) )
                ++i;
            std::string word{ src.substr( start, i - start ) };
            if ( i + 1 < src.size() && src[ i ] == '$' && src[ i + 1 ] == '0' )
            {
                i += 2;
                push( Token{ TokenKind::pre_identifier, word, 0, span } );
            }
            else
                push( Token{ TokenKind::identifier, word, 0, span } );
            continue;
        }
        if ( std::isdigit( static_cast< unsigned char >( c ) ) )
        {
            std::size_t start = i;
            std::int64_t value = 0;
            while ( i < src.size() && std::isdigit( static_cast< unsigned char >( src[ i ] ) ) )
            {
                value = value * 10 + ( src[ i ] - '0' );
                if ( value > ( std::int64_t{ 1 } << 52 ) )
                    throw ParseError( "E-SYNTAX-002", "integer literal too large", span );
                ++i;
            }
            push( Token{ TokenKind::integer, std::string{ src.substr( start, i - start ) }, value, span } );
            continue;
        }

        bool matched = false;
        if ( static_cast< unsigned char >( c ) >= 0x80 )
        {
            for ( const auto& alias : unicode_aliases )
            {
                if ( src.substr( i, alias.utf8.size() ) == alias.utf8 )
                {
                    i += alias.utf8.size();
                    if ( alias.ascii == "{}" )
                    {
                        push( Token{ TokenKind::punct, "{", 0, span } );
                        push( Token{ TokenKind::punct, "}", 0, span } );
                    }
                    else
                    {
                        bool word = ident_start( alias.ascii.front() );
                        push( Token{ word ? TokenKind::identifier : TokenKind::punct, std::string{ alias.ascii }, 0,
                                     span } );
                    }
                    matched = true;
                    break;
                }
            }
            if ( !matched )
                throw ParseError( "E-SYNTAX-001", "unsupported character", span );
            continue;
        }

        for ( auto p : ascii_punct )
        {
            if ( src.substr( i, p.size() ) == p )
            {
                if ( p == "(" || p == "{" || p == "[" )
                    ++depth;
                else if ( ( p == ")" || p == "}" || p == "]" ) && depth > 0 )
                    --depth;
                push( Token{ TokenKind::punct, std::string{ p }, 0, span } );
                i += p.size();
                matched = true;
                break;
            }
        }
        if ( !matched )
            throw ParseError( "E-SYNTAX-001", std::string{ "unexpected character '" } + c + "'", span );
    }
    if ( options.newlines && !out.empty() && out.back().kind != TokenKind::newline )
        out.push_back( Token{ TokenKind::newline, "\n", 0, span_at( i ) } );
    out.push_back( Token{ TokenKind::end, "", 0, span_at( i ) } );
    return out;
}

std::string describe( const Token& token )
{
    switch ( token.kind )
    {
    case TokenKind::end:
        return "end of input";
    case TokenKind::newline:
        return "end of line";
    case TokenKind::pre_identifier:
        return "'" + token.text + "$0'";
    default:
        return "'" + token.text + "'";
    }
}

TokenStream::TokenStream( std::vector< Token > tokens ) : _tokens{ std::move( tokens ) }
{
    if ( _tokens.empty() || _tokens.back().kind != TokenKind::end )
        _tokens.push_back( Token{} );
}

const Token& TokenStream::peek( std::size_t ahead ) const
{
    std::size_t at = std::min( _pos + ahead, _tokens.size() - 1 );
    return _tokens[ at ];
}

const Token& TokenStream::next()
{
    const Token& t = _tokens[ _pos ];
    if ( _pos + 1 < _tokens.size() )
        ++_pos;
    return t;
}

bool TokenStream::accept( std::string_view text )
{
    if ( peek().is( text ) )
    {
        next();
        return true;
    }
    return false;
}

const Token& TokenStream::expect( std::string_view text, std::string_view code )
{
    if ( !peek().is( text ) )
        fail( code, "expected '" + std::string{ text } + "' but found " + describe( peek() ) );
    return next();
}

const Token& TokenStream::expect_identifier( std::string_view code, std::string_view what )
{
    if ( peek().kind != TokenKind::identifier )
        fail( code, "expected " + std::string{ what } + " but found " + describe( peek() ) );
    return next();
}

void TokenStream::skip_newlines()
{
    while ( peek().kind == TokenKind::newline )
        next();
}

void TokenStream::expect_line_end( std::string_view code )
{
    if ( peek().kind == TokenKind::newline )
    {
        next();
        return;
    }
    if ( peek().kind != TokenKind::end )
        fail( code, "expected end of line but found " + describe( peek() ) );
}

void TokenStream::fail( std::string_view code, const std::string& message ) const
{
    throw ParseError( std::string{ code }, message, peek().span );
}

} // namespace vdd
