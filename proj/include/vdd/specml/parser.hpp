#pragma once

#include "vdd/lexer.hpp"
#include "vdd/specml/ast.hpp"

#include <string>
#include <string_view>

namespace vdd::specml
{

// Operator precedence, loosest first:
//   quantifier body, <=>, => (right), or, &, not, relations
//   (= /= < <= > >= : /: <:), |->, set operators (\/ /\ \ <+ <| <<|),
//   .., + -, * / mod, unary -, application f(x).
Expr parse_expression( TokenStream& tokens );
Expr parse_expression( std::string_view text );

DeclType parse_decl_type( TokenStream& tokens );

MachineSpec parse_machine( std::string_view text );
ContextSpec parse_context( std::string_view text );

bool is_builtin( std::string_view name );
bool is_reserved_word( std::string_view word );

// Canonical printers. The output reparses to a structurally equal tree and
// is what content hashes are computed over.
std::string print( const Expr& e );
std::string print( const DeclType& t );
std::string print( const MachineSpec& m );
std::string print( const ContextSpec& c );

} // namespace vdd::specml
