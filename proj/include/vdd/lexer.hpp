#pragma once

#include "vdd/diagnostic.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace vdd
{

enum class TokenKind
{
    identifier,
    pre_identifier, // v$0
    integer,
    punct,
    newline,
    end,
};

struct Token
{
    TokenKind kind = TokenKind::end;
    std::string text;
    std::int64_t value = 0;
    Span span;

    [[nodiscard]] bool is( std::string_view punct_or_word ) const
    {
        return ( kind == TokenKind::punct || kind == TokenKind::identifier ) && text == punct_or_word;
    }
};

struct LexOptions
{
    // Emit newline tokens. When set, a newline is still suppressed inside
    // brackets and after a token that cannot end an expression, so long
    // predicates may be wrapped after an operator.
    bool newlines = true;
};

// Tokenizes the shared surface syntax of all project files. Unicode
// mathematical operators are mapped onto their ASCII spelling, `#` starts a
// comment running to the end of the line.
std::vector< Token > tokenize( std::string_view source, LexOptions options = {} );

// Cursor over a token vector with the small set of helpers every
// recursive-descent parser in the project needs.
class TokenStream
{
    std::vector< Token > _tokens;
    std::size_t _pos = 0;

public:
    explicit TokenStream( std::vector< Token > tokens );

    [[nodiscard]] const Token& peek( std::size_t ahead = 0 ) const;
    const Token& next();
    [[nodiscard]] bool at_end() const { return peek().kind == TokenKind::end; }
    [[nodiscard]] bool at_line_end() const
    {
        return peek().kind == TokenKind::newline || peek().kind == TokenKind::end;
    }

    bool accept( std::string_view text );
    const Token& expect( std::string_view text, std::string_view code );
    const Token& expect_identifier( std::string_view code, std::string_view what = "identifier" );
    void skip_newlines();
    void expect_line_end( std::string_view code );

    [[noreturn]] void fail( std::string_view code, const std::string& message ) const;

    [[nodiscard]] std::size_t position() const { return _pos; }
    void rewind( std::size_t pos ) { _pos = pos; }
};

std::string describe( const Token& token );

} // namespace vdd
