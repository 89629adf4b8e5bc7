#include "vdd/specml/parser.hpp"

#include <algorithm>
#include <array>
#include <sstream>

namespace vdd::specml
{

namespace
{

constexpr std::string_view syntax_code = "E-SYNTAX-010";

constexpr std::array< std::string_view, 7 > builtins = { "card", "dom", "ran", "DIST", "abs", "min", "max" };

constexpr std::array< std::string_view, 21 > reserved = {
    "not",    "or",        "mod",     "forall", "exists", "TRUE",   "FALSE",
    "true",   "false",     "machine", "refines", "sees",  "implements", "variables",
    "invariants", "events", "event",  "any",    "when",   "then",   "end",
};

bool is_relation( const Token& t )
{
    static constexpr std::array< std::string_view, 9 > ops = { "=", "/=", "<", "<=", ">", ">=", ":", "/:", "<:" };
    if ( t.kind != TokenKind::punct )
        return false;
    return std::find( ops.begin(), ops.end(), t.text ) != ops.end();
}

bool is_set_operator( const Token& t )
{
    static constexpr std::array< std::string_view, 6 > ops = { "\\/", "/\\", "\\", "<+", "<|", "<<|" };
    if ( t.kind != TokenKind::punct )
        return false;
    return std::find( ops.begin(), ops.end(), t.text ) != ops.end();
}

class ExprParser
{
    TokenStream& _ts;

public:
    explicit ExprParser( TokenStream& ts ) : _ts{ ts } {}

    Expr predicate() { return equivalence(); }

private:
    Expr equivalence()
    {
        Expr lhs = implication();
        while ( _ts.peek().is( "<=>" ) )
        {
            Span span = _ts.next().span;
            lhs = Expr::binary( "<=>", std::move( lhs ), implication(), span );
        }
        return lhs;
    }

    Expr implication()
    {
        Expr lhs = disjunction();
        if ( _ts.peek().is( "=>" ) )
        {
            Span span = _ts.next().span;
            return Expr::binary( "=>", std::move( lhs ), implication(), span );
        }
        return lhs;
    }

    Expr disjunction()
    {
        Expr lhs = conjunction();
        while ( _ts.peek().is( "or" ) )
        {
            Span span = _ts.next().span;
            lhs = Expr::binary( "or", std::move( lhs ), conjunction(), span );
        }
        return lhs;
    }

    Expr conjunction()
    {
        Expr lhs = negation();
        while ( _ts.peek().is( "&" ) )
        {
            Span span = _ts.next().span;
            lhs = Expr::binary( "&", std::move( lhs ), negation(), span );
        }
        return lhs;
    }

    Expr negation()
    {
        const Token& t = _ts.peek();
        if ( t.kind == TokenKind::identifier && t.text == "not" )
        {
            Span span = _ts.next().span;
            return Expr::unary( "not", negation(), span );
        }
        if ( t.kind == TokenKind::identifier && ( t.text == "forall" || t.text == "exists" ) )
            return quantifier();
        return relation();
    }

    Expr quantifier()
    {
        const Token& head = _ts.next();
        Expr q;
        q.kind = ExprKind::quantifier;
        q.op = head.text;
        q.span = head.span;
        do
        {
            const Token& v = _ts.expect_identifier( syntax_code, "bound variable" );
            if ( is_reserved_word( v.text ) )
                throw ParseError( std::string{ syntax_code }, "reserved word '" + v.text + "' used as variable",
                                  v.span );
            q.bound.push_back( v.text );
        } while ( _ts.accept( "," ) );

        std::optional< Expr > domain;
        if ( _ts.accept( ":" ) )
            domain = maplet();
        _ts.expect( ".", syntax_code );
        Expr body = predicate();

        if ( domain )
        {
            // forall x : S . P  ==  forall x . x : S => P
            // exists x : S . P  ==  exists x . x : S & P
            Expr guard;
            bool first = true;
            for ( const auto& name : q.bound )
            {
                Expr member = Expr::binary( ":", Expr::identifier( name, q.span ), *domain, q.span );
                guard = first ? std::move( member ) : Expr::binary( "&", std::move( guard ), std::move( member ), q.span );
                first = false;
            }
            body = Expr::binary( q.op == "forall" ? "=>" : "&", std::move( guard ), std::move( body ), q.span );
        }
        q.args.push_back( std::move( body ) );
        return q;
    }

    Expr relation()
    {
        Expr lhs = maplet();
        if ( is_relation( _ts.peek() ) )
        {
            const Token& op = _ts.next();
            Expr rhs = maplet();
            if ( is_relation( _ts.peek() ) )
                _ts.fail( syntax_code, "relations do not chain; add parentheses" );
            return Expr::binary( op.text, std::move( lhs ), std::move( rhs ), op.span );
        }
        return lhs;
    }

public:
    Expr maplet()
    {
        Expr lhs = set_expression();
        while ( _ts.peek().is( "|->" ) )
        {
            Span span = _ts.next().span;
            lhs = Expr::binary( "|->", std::move( lhs ), set_expression(), span );
        }
        return lhs;
    }

    Expr additive()
    {
        Expr lhs = multiplicative();
        while ( _ts.peek().is( "+" ) || _ts.peek().is( "-" ) )
        {
            const Token& op = _ts.next();
            lhs = Expr::binary( op.text, std::move( lhs ), multiplicative(), op.span );
        }
        return lhs;
    }

private:
    Expr set_expression()
    {
        Expr lhs = range();
        while ( is_set_operator( _ts.peek() ) )
        {
            const Token& op = _ts.next();
            lhs = Expr::binary( op.text, std::move( lhs ), range(), op.span );
        }
        return lhs;
    }

    Expr range()
    {
        Expr lhs = additive();
        if ( _ts.peek().is( ".." ) )
        {
            Span span = _ts.next().span;
            return Expr::binary( "..", std::move( lhs ), additive(), span );
        }
        return lhs;
    }

    Expr multiplicative()
    {
        Expr lhs = unary();
        while ( _ts.peek().is( "*" ) || _ts.peek().is( "/" ) || _ts.peek().is( "mod" ) )
        {
            const Token& op = _ts.next();
            lhs = Expr::binary( op.text, std::move( lhs ), unary(), op.span );
        }
        return lhs;
    }

    Expr unary()
    {
        if ( _ts.peek().is( "-" ) )
        {
            Span span = _ts.next().span;
            Expr operand = unary();
            if ( operand.kind == ExprKind::integer )
            {
                operand.value = -operand.value;
                operand.span = span;
                return operand;
            }
            return Expr::unary( "-", std::move( operand ), span );
        }
        return postfix();
    }

    Expr postfix()
    {
        Expr e = primary();
        while ( _ts.peek().is( "(" )
                && ( e.kind == ExprKind::identifier || e.kind == ExprKind::pre_identifier || e.kind == ExprKind::apply
                     || e.kind == ExprKind::call ) )
        {
            Span span = _ts.next().span;
            Expr arg = predicate();
            _ts.expect( ")", syntax_code );
            Expr app;
            app.kind = ExprKind::apply;
            app.span = span;
            app.args.push_back( std::move( e ) );
            app.args.push_back( std::move( arg ) );
            e = std::move( app );
        }
        return e;
    }

    Expr primary()
    {
        const Token& t = _ts.peek();
        switch ( t.kind )
        {
        case TokenKind::integer:
            _ts.next();
            return Expr::integer( t.value, t.span );
        case TokenKind::pre_identifier:
        {
            _ts.next();
            Expr e = Expr::identifier( t.text, t.span );
            e.kind = ExprKind::pre_identifier;
            return e;
        }
        case TokenKind::identifier:
        {
            if ( t.text == "TRUE" || t.text == "true" )
            {
                _ts.next();
                return Expr::boolean( true, t.span );
            }
            if ( t.text == "FALSE" || t.text == "false" )
            {
                _ts.next();
                return Expr::boolean( false, t.span );
            }
            if ( is_builtin( t.text ) && _ts.peek( 1 ).is( "(" ) )
            {
                Token head = _ts.next();
                _ts.next();
                Expr call;
                call.kind = ExprKind::call;
                call.op = head.text;
                call.span = head.span;
                if ( !_ts.peek().is( ")" ) )
                {
                    do
                        call.args.push_back( predicate() );
                    while ( _ts.accept( "," ) );
                }
                _ts.expect( ")", syntax_code );
                return call;
            }
            if ( is_reserved_word( t.text ) )
                _ts.fail( syntax_code, "unexpected keyword '" + t.text + "'" );
            _ts.next();
            return Expr::identifier( t.text, t.span );
        }
        case TokenKind::punct:
            if ( t.text == "(" )
            {
                _ts.next();
                Expr inner = predicate();
                _ts.expect( ")", syntax_code );
                return inner;
            }
            if ( t.text == "{" )
            {
                Span span = _ts.next().span;
                Expr set;
                set.kind = ExprKind::set_literal;
                set.span = span;
                if ( !_ts.peek().is( "}" ) )
                {
                    do
                        set.args.push_back( predicate() );
                    while ( _ts.accept( "," ) );
                }
                _ts.expect( "}", syntax_code );
                return set;
            }
            break;
        default:
            break;
        }
        _ts.fail( syntax_code, "expected an expression but found " + describe( t ) );
    }
};

// ---------------------------------------------------------------- types

DeclType decl_type_term( TokenStream& ts );

DeclType decl_type_full( TokenStream& ts )
{
    DeclType lhs = decl_type_term( ts );
    if ( ts.peek().is( "+->" ) || ts.peek().is( "-->" ) )
    {
        const Token& op = ts.next();
        DeclType fn;
        fn.kind = op.text == "+->" ? DeclType::Kind::partial_function : DeclType::Kind::total_function;
        fn.span = op.span;
        fn.parts.push_back( std::move( lhs ) );
        fn.parts.push_back( decl_type_full( ts ) );
        return fn;
    }
    return lhs;
}

DeclType decl_type_term( TokenStream& ts )
{
    const Token& t = ts.peek();
    DeclType out;
    out.span = t.span;
    if ( t.is( "(" ) )
    {
        ts.next();
        out = decl_type_full( ts );
        ts.expect( ")", syntax_code );
        return out;
    }
    if ( t.kind == TokenKind::identifier )
    {
        if ( t.text == "BOOL" )
        {
            ts.next();
            out.kind = DeclType::Kind::boolean;
            return out;
        }
        if ( t.text == "INT" || t.text == "NAT" )
        {
            ts.next();
            out.kind = t.text == "INT" ? DeclType::Kind::integer : DeclType::Kind::natural;
            return out;
        }
        if ( t.text == "set" && ts.peek( 1 ).is( "of" ) )
        {
            ts.next();
            ts.next();
            out.kind = DeclType::Kind::set_of;
            out.parts.push_back( decl_type_term( ts ) );
            return out;
        }
        if ( t.text == "POW" && ts.peek( 1 ).is( "(" ) )
        {
            ts.next();
            ts.next();
            out.kind = DeclType::Kind::set_of;
            out.parts.push_back( decl_type_full( ts ) );
            ts.expect( ")", syntax_code );
            return out;
        }
        const Token& after = ts.peek( 1 );
        bool arithmetic = after.is( ".." ) || after.is( "+" ) || after.is( "-" ) || after.is( "*" )
                       || after.is( "/" ) || after.is( "mod" );
        if ( !arithmetic )
        {
            ts.next();
            out.kind = DeclType::Kind::carrier;
            out.name = t.text;
            return out;
        }
    }
    ExprParser p{ ts };
    out.kind = DeclType::Kind::range;
    out.bounds.push_back( p.additive() );
    ts.expect( "..", syntax_code );
    out.bounds.push_back( p.additive() );
    return out;
}

// -------------------------------------------------------------- printing

bool compound( const Expr& e )
{
    return e.kind == ExprKind::binary || e.kind == ExprKind::unary || e.kind == ExprKind::quantifier
        || ( e.kind == ExprKind::integer && e.value < 0 );
}

void print_to( std::ostream& out, const Expr& e );

void print_operand( std::ostream& out, const Expr& e )
{
    if ( compound( e ) )
    {
        out << '(';
        print_to( out, e );
        out << ')';
    }
    else
        print_to( out, e );
}

void print_to( std::ostream& out, const Expr& e )
{
    switch ( e.kind )
    {
    case ExprKind::integer:
        out << e.value;
        return;
    case ExprKind::boolean:
        out << ( e.value ? "TRUE" : "FALSE" );
        return;
    case ExprKind::identifier:
        out << e.op;
        return;
    case ExprKind::pre_identifier:
        out << e.op << "$0";
        return;
    case ExprKind::unary:
        out << ( e.op == "not" ? "not " : "-" );
        print_operand( out, e.args[ 0 ] );
        return;
    case ExprKind::binary:
        print_operand( out, e.args[ 0 ] );
        out << ' ' << e.op << ' ';
        print_operand( out, e.args[ 1 ] );
        return;
    case ExprKind::set_literal:
    {
        out << '{';
        for ( std::size_t i = 0; i < e.args.size(); ++i )
        {
            if ( i )
                out << ", ";
            print_to( out, e.args[ i ] );
        }
        out << '}';
        return;
    }
    case ExprKind::call:
    {
        out << e.op << '(';
        for ( std::size_t i = 0; i < e.args.size(); ++i )
        {
            if ( i )
                out << ", ";
            print_to( out, e.args[ i ] );
        }
        out << ')';
        return;
    }
    case ExprKind::apply:
        print_operand( out, e.args[ 0 ] );
        out << '(';
        print_to( out, e.args[ 1 ] );
        out << ')';
        return;
    case ExprKind::quantifier:
    {
        out << e.op << ' ';
        for ( std::size_t i = 0; i < e.bound.size(); ++i )
        {
            if ( i )
                out << ", ";
            out << e.bound[ i ];
        }
        out << " . ";
        print_to( out, e.args[ 0 ] );
        return;
    }
    }
}

std::string join( const std::vector< std::string >& names )
{
    std::string out;
    for ( std::size_t i = 0; i < names.size(); ++i )
    {
        if ( i )
            out += ", ";
        out += names[ i ];
    }
    return out;
}

// ------------------------------------------------------------- machines

bool is_section_keyword( const Token& t )
{
    static constexpr std::array< std::string_view, 11 > words = {
        "refines", "sees", "implements", "variables", "invariants", "events",
        "event",   "any",  "when",       "then",      "end",
    };
    return t.kind == TokenKind::identifier && std::find( words.begin(), words.end(), t.text ) != words.end();
}

std::vector< std::string > name_list( TokenStream& ts )
{
    std::vector< std::string > out;
    do
        out.push_back( ts.expect_identifier( syntax_code, "name" ).text );
    while ( ts.accept( "," ) );
    return out;
}

std::vector< GluingNote > scan_gluing( std::string_view text )
{
    std::vector< GluingNote > out;
    std::istringstream in{ std::string{ text } };
    std::string line;
    int number = 0;
    while ( std::getline( in, line ) )
    {
        ++number;
        auto hash = line.find( '#' );
        if ( hash == std::string::npos )
            continue;
        auto tag = line.find( "@glue", hash );
        if ( tag == std::string::npos )
            continue;
        std::string rest = line.substr( tag + 5 );
        auto colon = rest.find( ':' );
        if ( colon == std::string::npos )
            throw ParseError( std::string{ syntax_code }, "gluing note needs 'variable: predicate'",
                              Span{ number, static_cast< int >( tag ) + 1 } );
        auto trim = []( std::string s ) {
            auto b = s.find_first_not_of( " \t\r" );
            auto e = s.find_last_not_of( " \t\r" );
            return b == std::string::npos ? std::string{} : s.substr( b, e - b + 1 );
        };
        out.push_back( GluingNote{ trim( rest.substr( 0, colon ) ), trim( rest.substr( colon + 1 ) ),
                                   Span{ number, static_cast< int >( tag ) + 1 } } );
    }
    return out;
}

// Parses one or more predicates: inline after the keyword, then one per line
// until a section keyword.
std::vector< Expr > predicate_lines( TokenStream& ts )
{
    std::vector< Expr > out;
    ExprParser p{ ts };
    if ( !ts.at_line_end() )
    {
        out.push_back( p.predicate() );
    }
    ts.expect_line_end( syntax_code );
    ts.skip_newlines();
    while ( !ts.at_end() && !is_section_keyword( ts.peek() ) )
    {
        out.push_back( p.predicate() );
        ts.expect_line_end( syntax_code );
        ts.skip_newlines();
    }
    return out;
}

Assignment assignment( TokenStream& ts )
{
    Assignment a;
    const Token& target = ts.expect_identifier( syntax_code, "assigned variable" );
    a.target = target.text;
    a.span = target.span;
    ExprParser p{ ts };
    if ( ts.accept( "(" ) )
    {
        a.index = p.predicate();
        ts.expect( ")", syntax_code );
    }
    ts.expect( ":=", syntax_code );
    a.value = p.predicate();
    return a;
}

std::vector< Assignment > assignment_lines( TokenStream& ts )
{
    std::vector< Assignment > out;
    if ( !ts.at_line_end() )
        out.push_back( assignment( ts ) );
    ts.expect_line_end( syntax_code );
    ts.skip_newlines();
    while ( !ts.at_end() && !is_section_keyword( ts.peek() ) )
    {
        out.push_back( assignment( ts ) );
        ts.expect_line_end( syntax_code );
        ts.skip_newlines();
    }
    return out;
}

EventSpec event( TokenStream& ts )
{
    EventSpec ev;
    ev.span = ts.expect( "event", syntax_code ).span;
    ev.name = ts.expect_identifier( syntax_code, "event name" ).text;
    ts.expect_line_end( syntax_code );
    ts.skip_newlines();
    if ( ts.accept( "any" ) )
    {
        do
        {
            Parameter p;
            const Token& name = ts.expect_identifier( syntax_code, "parameter name" );
            p.name = name.text;
            p.span = name.span;
            ts.expect( ":", syntax_code );
            p.type = parse_decl_type( ts );
            ev.parameters.push_back( std::move( p ) );
        } while ( ts.accept( "," ) );
        ts.expect_line_end( syntax_code );
        ts.skip_newlines();
    }
    if ( ts.accept( "when" ) )
        ev.guards = predicate_lines( ts );
    if ( ts.accept( "then" ) )
        ev.actions = assignment_lines( ts );
    ts.expect( "end", syntax_code );
    ts.expect_line_end( syntax_code );
    ts.skip_newlines();
    return ev;
}

} // namespace

bool is_builtin( std::string_view name )
{
    return std::find( builtins.begin(), builtins.end(), name ) != builtins.end();
}

bool is_reserved_word( std::string_view word )
{
    return std::find( reserved.begin(), reserved.end(), word ) != reserved.end();
}

Expr parse_expression( TokenStream& tokens )
{
    ExprParser p{ tokens };
    return p.predicate();
}

Expr parse_expression( std::string_view text )
{
    TokenStream ts{ tokenize( text, LexOptions{ false } ) };
    Expr e = parse_expression( ts );
    if ( !ts.at_end() )
        ts.fail( syntax_code, "unexpected " + describe( ts.peek() ) + " after expression" );
    return e;
}

DeclType parse_decl_type( TokenStream& tokens )
{
    return decl_type_full( tokens );
}

MachineSpec parse_machine( std::string_view text )
{
    MachineSpec m;
    m.gluing = scan_gluing( text );
    TokenStream ts{ tokenize( text ) };
    ts.skip_newlines();
    m.span = ts.expect( "machine", syntax_code ).span;
    m.name = ts.expect_identifier( syntax_code, "machine name" ).text;
    ts.expect_line_end( syntax_code );
    ts.skip_newlines();

    while ( true )
    {
        ts.skip_newlines();
        if ( ts.accept( "refines" ) )
        {
            m.refines = ts.expect_identifier( syntax_code, "machine name" ).text;
            ts.expect_line_end( syntax_code );
        }
        else if ( ts.accept( "sees" ) )
        {
            auto names = name_list( ts );
            m.sees.insert( m.sees.end(), names.begin(), names.end() );
            ts.expect_line_end( syntax_code );
        }
        else if ( ts.accept( "implements" ) )
        {
            auto names = name_list( ts );
            m.implements.insert( m.implements.end(), names.begin(), names.end() );
            ts.expect_line_end( syntax_code );
        }
        else if ( ts.accept( "variables" ) )
        {
            ts.expect_line_end( syntax_code );
            ts.skip_newlines();
            while ( !ts.at_end() && !is_section_keyword( ts.peek() ) )
            {
                std::vector< Token > names;
                do
                    names.push_back( ts.expect_identifier( syntax_code, "variable name" ) );
                while ( ts.accept( "," ) );
                ts.expect( ":", syntax_code );
                DeclType type = parse_decl_type( ts );
                for ( const auto& n : names )
                    m.variables.push_back( VariableDecl{ n.text, type, n.span } );
                ts.expect_line_end( syntax_code );
                ts.skip_newlines();
            }
        }
        else if ( ts.accept( "invariants" ) )
        {
            ts.expect_line_end( syntax_code );
            ts.skip_newlines();
            while ( !ts.at_end() && !is_section_keyword( ts.peek() ) )
            {
                const Token& label = ts.expect_identifier( syntax_code, "invariant label" );
                ts.expect( ":", syntax_code );
                Expr pred = parse_expression( ts );
                m.invariants.push_back( LabeledPredicate{ label.text, std::move( pred ), label.span } );
                ts.expect_line_end( syntax_code );
                ts.skip_newlines();
            }
        }
        else if ( ts.accept( "events" ) )
        {
            ts.expect_line_end( syntax_code );
            ts.skip_newlines();
            while ( ts.peek().is( "event" ) )
                m.events.push_back( event( ts ) );
        }
        else if ( ts.accept( "end" ) )
        {
            ts.skip_newlines();
            if ( !ts.at_end() )
                ts.fail( syntax_code, "unexpected " + describe( ts.peek() ) + " after machine end" );
            break;
        }
        else
            ts.fail( syntax_code, "expected a machine clause but found " + describe( ts.peek() ) );
    }
    return m;
}

ContextSpec parse_context( std::string_view text )
{
    ContextSpec c;
    TokenStream ts{ tokenize( text ) };
    ts.skip_newlines();
    c.span = ts.expect( "context", syntax_code ).span;
    c.name = ts.expect_identifier( syntax_code, "context name" ).text;
    ts.expect_line_end( syntax_code );
    auto section = [ & ]( const Token& t ) { return t.is( "sets" ) || t.is( "constants" ) || t.is( "end" ); };
    while ( true )
    {
        ts.skip_newlines();
        if ( ts.accept( "sets" ) )
        {
            ts.expect_line_end( syntax_code );
            ts.skip_newlines();
            while ( !ts.at_end() && !section( ts.peek() ) )
            {
                const Token& name = ts.expect_identifier( syntax_code, "carrier set name" );
                CarrierDecl d{ name.text, {}, name.span };
                ts.expect( "=", syntax_code );
                ts.expect( "{", syntax_code );
                if ( !ts.peek().is( "}" ) )
                    d.elements = name_list( ts );
                ts.expect( "}", syntax_code );
                c.sets.push_back( std::move( d ) );
                ts.expect_line_end( syntax_code );
                ts.skip_newlines();
            }
        }
        else if ( ts.accept( "constants" ) )
        {
            ts.expect_line_end( syntax_code );
            ts.skip_newlines();
            while ( !ts.at_end() && !section( ts.peek() ) )
            {
                const Token& name = ts.expect_identifier( syntax_code, "constant name" );
                ts.expect( "=", syntax_code );
                Expr value = parse_expression( ts );
                c.constants.push_back( ConstantDecl{ name.text, std::move( value ), name.span } );
                ts.expect_line_end( syntax_code );
                ts.skip_newlines();
            }
        }
        else if ( ts.accept( "end" ) )
        {
            ts.skip_newlines();
            if ( !ts.at_end() )
                ts.fail( syntax_code, "unexpected " + describe( ts.peek() ) + " after context end" );
            break;
        }
        else
            ts.fail( syntax_code, "expected a context clause but found " + describe( ts.peek() ) );
    }
    return c;
}

std::string print( const Expr& e )
{
    std::ostringstream out;
    print_to( out, e );
    return out.str();
}

std::string print( const DeclType& t )
{
    switch ( t.kind )
    {
    case DeclType::Kind::boolean:
        return "BOOL";
    case DeclType::Kind::integer:
        return "INT";
    case DeclType::Kind::natural:
        return "NAT";
    case DeclType::Kind::carrier:
        return t.name;
    case DeclType::Kind::range:
    {
        std::ostringstream out;
        print_operand( out, t.bounds[ 0 ] );
        out << "..";
        print_operand( out, t.bounds[ 1 ] );
        return out.str();
    }
    case DeclType::Kind::set_of:
        return "POW(" + print( t.parts[ 0 ] ) + ")";
    case DeclType::Kind::partial_function:
    case DeclType::Kind::total_function:
    {
        std::string lhs = print( t.parts[ 0 ] );
        if ( t.parts[ 0 ].kind == DeclType::Kind::partial_function
             || t.parts[ 0 ].kind == DeclType::Kind::total_function )
            lhs = "(" + lhs + ")";
        return lhs + ( t.kind == DeclType::Kind::partial_function ? " +-> " : " --> " ) + print( t.parts[ 1 ] );
    }
    }
    return "?";
}

std::string print( const MachineSpec& m )
{
    std::ostringstream out;
    for ( const auto& g : m.gluing )
        out << "# @glue " << g.variable << ": " << g.text << '\n';
    out << "machine " << m.name << '\n';
    if ( m.refines )
        out << "refines " << *m.refines << '\n';
    if ( !m.sees.empty() )
        out << "sees " << join( m.sees ) << '\n';
    if ( !m.implements.empty() )
        out << "implements " << join( m.implements ) << '\n';
    if ( !m.variables.empty() )
    {
        out << "variables\n";
        for ( const auto& v : m.variables )
            out << "  " << v.name << " : " << print( v.type ) << '\n';
    }
    if ( !m.invariants.empty() )
    {
        out << "invariants\n";
        for ( const auto& inv : m.invariants )
            out << "  " << inv.label << ": " << print( inv.predicate ) << '\n';
    }
    if ( !m.events.empty() )
    {
        out << "events\n";
        for ( const auto& ev : m.events )
        {
            out << "  event " << ev.name << '\n';
            if ( !ev.parameters.empty() )
            {
                out << "    any ";
                for ( std::size_t i = 0; i < ev.parameters.size(); ++i )
                {
                    if ( i )
                        out << ", ";
                    out << ev.parameters[ i ].name << " : " << print( ev.parameters[ i ].type );
                }
                out << '\n';
            }
            if ( !ev.guards.empty() )
            {
                out << "    when\n";
                for ( const auto& g : ev.guards )
                    out << "      " << print( g ) << '\n';
            }
            if ( !ev.actions.empty() )
            {
                out << "    then\n";
                for ( const auto& a : ev.actions )
                {
                    out << "      " << a.target;
                    if ( a.index )
                        out << '(' << print( *a.index ) << ')';
                    out << " := " << print( a.value ) << '\n';
                }
            }
            out << "  end\n";
        }
    }
    out << "end\n";
    return out.str();
}

std::string print( const ContextSpec& c )
{
    std::ostringstream out;
    out << "context " << c.name << '\n';
    if ( !c.sets.empty() )
    {
        out << "sets\n";
        for ( const auto& s : c.sets )
            out << "  " << s.name << " = {" << join( s.elements ) << "}\n";
    }
    if ( !c.constants.empty() )
    {
        out << "constants\n";
        for ( const auto& k : c.constants )
            out << "  " << k.name << " = " << print( k.value ) << '\n';
    }
    out << "end\n";
    return out.str();
}

} // namespace vdd::specml
