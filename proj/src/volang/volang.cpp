#include "vdd/volang.hpp"

#include "vdd/lexer.hpp"
#include "vdd/specml/parser.hpp"

#include <algorithm>
#include <sstream>

namespace vdd::volang
{

namespace
{

constexpr std::string_view syntax = "E-SYNTAX-040";

std::string trim( std::string_view s )
{
    auto b = s.find_first_not_of( " \t\r" );
    if ( b == std::string_view::npos )
        return {};
    auto e = s.find_last_not_of( " \t\r" );
    return std::string{ s.substr( b, e - b + 1 ) };
}

bool is_ident_start( char c ) { return std::isalpha( static_cast< unsigned char >( c ) ) || c == '_'; }
bool is_ident_char( char c ) { return std::isalnum( static_cast< unsigned char >( c ) ) || c == '_'; }

// `{p}` parses as a one-element set literal; as a predicate argument the
// braces only delimit.
specml::Expr strip_braces( specml::Expr e )
{
    if ( e.kind == specml::ExprKind::set_literal && e.args.size() == 1 )
        return std::move( e.args.front() );
    return e;
}

bool temporal_letters( const Token& t )
{
    if ( t.kind != TokenKind::identifier || t.text.empty() )
        return false;
    return std::ranges::all_of( t.text, []( char c ) { return c == 'G' || c == 'F' || c == 'X'; } );
}

class LtlParser
{
    TokenStream& _ts;

    // Tries `rhs` after consuming an operator; on failure restores the
    // position before the operator so an enclosing grammar can take it.
    template < typename F >
    std::optional< Ltl > attempt( std::size_t before, F&& rhs )
    {
        try
        {
            return rhs();
        }
        catch ( const ParseError& )
        {
            _ts.rewind( before );
            return std::nullopt;
        }
    }

public:
    explicit LtlParser( TokenStream& ts )
        : _ts( ts )
    {}

    Ltl formula() { return implication(); }

    Ltl implication()
    {
        Ltl lhs = disjunction();
        auto before = _ts.position();
        if ( _ts.peek().is( "=>" ) )
        {
            Span span = _ts.next().span;
            if ( auto rhs = attempt( before, [&] { return implication(); } ) )
                return Ltl::make( LtlOp::implies, { std::move( lhs ), std::move( *rhs ) }, span );
        }
        return lhs;
    }

    Ltl disjunction()
    {
        Ltl lhs = conjunction();
        while ( _ts.peek().is( "or" ) )
        {
            auto before = _ts.position();
            Span span = _ts.next().span;
            auto rhs = attempt( before, [&] { return conjunction(); } );
            if ( !rhs )
                break;
            lhs = Ltl::make( LtlOp::or_, { std::move( lhs ), std::move( *rhs ) }, span );
        }
        return lhs;
    }

    Ltl conjunction()
    {
        Ltl lhs = until();
        while ( _ts.peek().is( "&" ) )
        {
            auto before = _ts.position();
            Span span = _ts.next().span;
            auto rhs = attempt( before, [&] { return until(); } );
            if ( !rhs )
                break;
            lhs = Ltl::make( LtlOp::and_, { std::move( lhs ), std::move( *rhs ) }, span );
        }
        return lhs;
    }

    Ltl until()
    {
        Ltl lhs = unary();
        auto before = _ts.position();
        if ( _ts.peek().kind == TokenKind::identifier && _ts.peek().text == "U" )
        {
            Span span = _ts.next().span;
            if ( auto rhs = attempt( before, [&] { return until(); } ) )
                return Ltl::make( LtlOp::until, { std::move( lhs ), std::move( *rhs ) }, span );
        }
        return lhs;
    }

    Ltl unary()
    {
        const Token& t = _ts.peek();
        if ( t.is( "not" ) || t.is( "!" ) )
        {
            Span span = _ts.next().span;
            return Ltl::make( LtlOp::not_, { unary() }, span );
        }
        if ( temporal_letters( t ) && t.text != "U" )
        {
            Token letters = _ts.next();
            Ltl operand = unary();
            for ( auto it = letters.text.rbegin(); it != letters.text.rend(); ++it )
            {
                LtlOp op = *it == 'G' ? LtlOp::globally : *it == 'F' ? LtlOp::finally : LtlOp::next;
                operand = Ltl::make( op, { std::move( operand ) }, letters.span );
            }
            return operand;
        }
        return primary();
    }

    Ltl primary()
    {
        const Token& t = _ts.peek();
        Span span = t.span;
        if ( t.is( "(" ) )
        {
            _ts.next();
            Ltl inner = formula();
            _ts.expect( ")", syntax );
            return inner;
        }
        if ( t.is( "{" ) )
        {
            _ts.next();
            specml::Expr p = specml::parse_expression( _ts );
            _ts.expect( "}", syntax );
            return Ltl::atom( LtlOp::state, std::move( p ), span );
        }
        if ( t.kind == TokenKind::identifier && t.text == "BA" )
        {
            _ts.next();
            _ts.expect( "(", syntax );
            specml::Expr p = strip_braces( specml::parse_expression( _ts ) );
            _ts.expect( ")", syntax );
            return Ltl::atom( LtlOp::ba, std::move( p ), span );
        }
        if ( t.is( "true" ) || t.is( "TRUE" ) )
        {
            _ts.next();
            return Ltl::make( LtlOp::truth, {}, span );
        }
        if ( t.is( "false" ) || t.is( "FALSE" ) )
        {
            _ts.next();
            return Ltl::make( LtlOp::falsity, {}, span );
        }
        _ts.fail( std::string{ syntax }, "expected an LTL formula but found " + describe( t ) );
    }
};

bool has_ba( const Ltl& f )
{
    return f.op == LtlOp::ba || std::ranges::any_of( f.args, has_ba );
}

// Non-temporal formula over state atoms as a plain predicate.
specml::Expr to_predicate( const Ltl& f )
{
    switch ( f.op )
    {
    case LtlOp::state:
        return f.predicate;
    case LtlOp::truth:
        return specml::Expr::boolean( true, f.span );
    case LtlOp::falsity:
        return specml::Expr::boolean( false, f.span );
    case LtlOp::not_:
        return specml::Expr::unary( "not", to_predicate( f.args[ 0 ] ), f.span );
    case LtlOp::and_:
        return specml::Expr::binary( "&", to_predicate( f.args[ 0 ] ), to_predicate( f.args[ 1 ] ), f.span );
    case LtlOp::or_:
        return specml::Expr::binary( "or", to_predicate( f.args[ 0 ] ), to_predicate( f.args[ 1 ] ), f.span );
    case LtlOp::implies:
        return specml::Expr::binary( "=>", to_predicate( f.args[ 0 ] ), to_predicate( f.args[ 1 ] ), f.span );
    default:
        throw Error( "E-VO-005", "temporal formula used as a state predicate", f.span );
    }
}

std::optional< TaskKind > kind_from_label( std::string_view label )
{
    if ( label.starts_with( "LTL" ) )
        return TaskKind::ltl;
    if ( label.starts_with( "INV" ) )
        return TaskKind::inv;
    if ( label.starts_with( "EXISTS" ) )
        return TaskKind::exists;
    if ( label.starts_with( "TRACE" ) )
        return TaskKind::trace;
    return std::nullopt;
}

std::optional< TaskKind > kind_keyword( const Token& t )
{
    if ( t.kind != TokenKind::identifier )
        return std::nullopt;
    if ( t.text == "LTL" )
        return TaskKind::ltl;
    if ( t.text == "INV" )
        return TaskKind::inv;
    if ( t.text == "TRACE" )
        return TaskKind::trace;
    if ( t.text == "EXISTS" )
        return TaskKind::exists;
    return std::nullopt;
}

class VoParser
{
    TokenStream& _ts;

public:
    explicit VoParser( TokenStream& ts )
        : _ts( ts )
    {}

    ValidationObligation obligation()
    {
        ValidationObligation vo;
        vo.span = _ts.peek().span;
        vo.id.requirement = _ts.expect_identifier( syntax, "requirement id" ).text;
        _ts.expect( "/", syntax );
        vo.id.model = _ts.expect_identifier( syntax, "machine name" ).text;
        _ts.expect( ":", syntax );
        vo.expr = sequence();
        return vo;
    }

    VOExpr sequence()
    {
        VOExpr lhs = disjunction();
        while ( _ts.peek().is( ";" ) )
        {
            Span span = _ts.next().span;
            lhs = node( NodeKind::seq, std::move( lhs ), disjunction(), span );
        }
        return lhs;
    }

    VOExpr disjunction()
    {
        VOExpr lhs = conjunction();
        while ( _ts.peek().is( "or" ) )
        {
            Span span = _ts.next().span;
            lhs = node( NodeKind::or_, std::move( lhs ), conjunction(), span );
        }
        return lhs;
    }

    VOExpr conjunction()
    {
        VOExpr lhs = unit();
        while ( _ts.peek().is( "&" ) )
        {
            Span span = _ts.next().span;
            lhs = node( NodeKind::and_, std::move( lhs ), unit(), span );
        }
        return lhs;
    }

    VOExpr unit()
    {
        if ( _ts.peek().is( "(" ) )
        {
            auto before = _ts.position();
            try
            {
                _ts.next();
                VOExpr inner = sequence();
                _ts.expect( ")", syntax );
                return inner;
            }
            catch ( const ParseError& )
            {
                // A parenthesised formula rather than a group of tasks.
                _ts.rewind( before );
            }
        }
        VOExpr leaf;
        leaf.span = _ts.peek().span;
        leaf.task = task();
        return leaf;
    }

private:
    static VOExpr node( NodeKind kind, VOExpr lhs, VOExpr rhs, Span span )
    {
        VOExpr e;
        e.kind = kind;
        e.span = span;
        e.children.push_back( std::move( lhs ) );
        e.children.push_back( std::move( rhs ) );
        return e;
    }

    Task task()
    {
        Task t;
        t.span = _ts.peek().span;
        if ( _ts.peek().kind == TokenKind::identifier && _ts.peek( 1 ).is( ":=" ) )
        {
            t.label = _ts.next().text;
            _ts.next();
        }
        if ( auto kind = kind_keyword( _ts.peek() ); kind && _ts.peek( 1 ).is( "(" ) )
        {
            _ts.next();
            _ts.next();
            t.kind = *kind;
            switch ( *kind )
            {
            case TaskKind::ltl:
                t.ltl = LtlParser{ _ts }.formula();
                break;
            case TaskKind::inv:
            case TaskKind::exists:
                t.predicate = strip_braces( specml::parse_expression( _ts ) );
                break;
            case TaskKind::trace:
                t.scenario = scenario();
                break;
            }
            _ts.expect( ")", syntax );
        }
        else
            formula_task( t );
        if ( _ts.accept( "[" ) )
        {
            t.explicit_scope = true;
            if ( !_ts.peek().is( "]" ) )
            {
                do
                    t.scope.push_back( _ts.expect_identifier( syntax, "domain name" ).text );
                while ( _ts.accept( "," ) );
            }
            _ts.expect( "]", syntax );
        }
        return t;
    }

    void formula_task( Task& t )
    {
        auto declared = kind_from_label( t.label );
        if ( declared == TaskKind::trace )
            _ts.fail( std::string{ syntax }, "a TRACE task needs the TRACE(...) form" );
        if ( declared == TaskKind::inv || declared == TaskKind::exists )
        {
            t.kind = *declared;
            t.predicate = strip_braces( specml::parse_expression( _ts ) );
            return;
        }
        auto before = _ts.position();
        try
        {
            Ltl f = LtlParser{ _ts }.formula();
            if ( declared || is_temporal( f ) || has_ba( f ) )
            {
                t.kind = TaskKind::ltl;
                t.ltl = std::move( f );
            }
            else
            {
                t.kind = TaskKind::inv;
                t.predicate = to_predicate( f );
            }
            return;
        }
        catch ( const ParseError& )
        {
            if ( declared )
                throw;
            _ts.rewind( before );
        }
        t.kind = TaskKind::inv;
        t.predicate = specml::parse_expression( _ts );
    }

    TraceStep step()
    {
        TraceStep s;
        s.span = _ts.peek().span;
        s.event = _ts.expect_identifier( syntax, "event name" ).text;
        if ( _ts.accept( "(" ) )
        {
            if ( !_ts.peek().is( ")" ) )
            {
                do
                {
                    if ( _ts.peek().kind == TokenKind::identifier && _ts.peek( 1 ).is( "=" ) )
                    {
                        std::string name = _ts.next().text;
                        _ts.next();
                        s.named.emplace_back( std::move( name ), specml::parse_expression( _ts ) );
                    }
                    else
                    {
                        if ( !s.named.empty() )
                            _ts.fail( std::string{ syntax }, "positional argument after a named one" );
                        s.positional.push_back( specml::parse_expression( _ts ) );
                    }
                } while ( _ts.accept( "," ) );
            }
            _ts.expect( ")", syntax );
        }
        return s;
    }

    specml::Expr final_predicate()
    {
        _ts.expect( "{", syntax );
        specml::Expr p = specml::parse_expression( _ts );
        _ts.expect( "}", syntax );
        return p;
    }

    // Either `e1; e2(a); {final}` or `[e1, e2(a)], {final}`.
    Scenario scenario()
    {
        Scenario sc;
        if ( _ts.accept( "[" ) )
        {
            if ( !_ts.peek().is( "]" ) )
            {
                do
                    sc.steps.push_back( step() );
                while ( _ts.accept( "," ) );
            }
            _ts.expect( "]", syntax );
            if ( _ts.accept( "," ) )
                sc.final = final_predicate();
            return sc;
        }
        if ( _ts.peek().is( ")" ) )
            return sc;
        do
        {
            if ( _ts.peek().is( "{" ) )
            {
                sc.final = final_predicate();
                break;
            }
            sc.steps.push_back( step() );
        } while ( _ts.accept( ";" ) );
        return sc;
    }
};

std::string print_ltl( const Ltl& f, bool nested );

std::string operand( const Ltl& f )
{
    bool binary = f.op == LtlOp::and_ || f.op == LtlOp::or_ || f.op == LtlOp::implies || f.op == LtlOp::until;
    return binary ? "(" + print_ltl( f, true ) + ")" : print_ltl( f, true );
}

std::string print_ltl( const Ltl& f, bool nested )
{
    (void)nested;
    switch ( f.op )
    {
    case LtlOp::state:
        return "{" + specml::print( f.predicate ) + "}";
    case LtlOp::ba:
        return "BA(" + specml::print( f.predicate ) + ")";
    case LtlOp::truth:
        return "true";
    case LtlOp::falsity:
        return "false";
    case LtlOp::not_:
        return "not(" + print_ltl( f.args[ 0 ], true ) + ")";
    case LtlOp::globally:
    case LtlOp::finally:
    case LtlOp::next:
    {
        std::string letters;
        const Ltl* cur = &f;
        while ( cur->op == LtlOp::globally || cur->op == LtlOp::finally || cur->op == LtlOp::next )
        {
            letters += cur->op == LtlOp::globally ? 'G' : cur->op == LtlOp::finally ? 'F' : 'X';
            cur = &cur->args[ 0 ];
        }
        return letters + "(" + print_ltl( *cur, true ) + ")";
    }
    case LtlOp::and_:
        return operand( f.args[ 0 ] ) + " & " + operand( f.args[ 1 ] );
    case LtlOp::or_:
        return operand( f.args[ 0 ] ) + " or " + operand( f.args[ 1 ] );
    case LtlOp::implies:
        return operand( f.args[ 0 ] ) + " => " + operand( f.args[ 1 ] );
    case LtlOp::until:
        return operand( f.args[ 0 ] ) + " U " + operand( f.args[ 1 ] );
    }
    return {};
}

std::string print_step( const TraceStep& s )
{
    std::string out = s.event;
    if ( s.positional.empty() && s.named.empty() )
        return out;
    out += "(";
    bool first = true;
    for ( const auto& p : s.positional )
    {
        out += first ? "" : ", ";
        out += specml::print( p );
        first = false;
    }
    for ( const auto& [ name, value ] : s.named )
    {
        out += first ? "" : ", ";
        out += name + "=" + specml::print( value );
        first = false;
    }
    return out + ")";
}

std::string print_expr( const VOExpr& e, NodeKind parent )
{
    if ( e.kind == NodeKind::task )
        return print( *e.task );
    std::string op = e.kind == NodeKind::seq ? " ; " : e.kind == NodeKind::or_ ? " or " : " & ";
    // Left-nested chains of one operator read without parentheses.
    std::string lhs = print_expr( e.children[ 0 ], e.kind );
    std::string rhs = print_expr( e.children[ 1 ], NodeKind::task );
    if ( e.children[ 1 ].kind != NodeKind::task )
        rhs = "(" + rhs + ")";
    std::string out = lhs + op + rhs;
    if ( parent != NodeKind::task && parent != e.kind )
        return "(" + out + ")";
    return out;
}

// Trace binding values are constants: integers, booleans, carrier elements
// or named context constants.
std::optional< specml::Value > constant_value( const specml::CompiledMachine& m, const specml::Expr& e )
{
    switch ( e.kind )
    {
    case specml::ExprKind::integer:
        return specml::Value::integer( e.value );
    case specml::ExprKind::boolean:
        return specml::Value::boolean( e.value != 0 );
    case specml::ExprKind::identifier:
        if ( auto it = m.elements.find( e.op ); it != m.elements.end() )
            return it->second;
        if ( auto it = m.constants.find( e.op ); it != m.constants.end() )
            return it->second.value;
        return std::nullopt;
    default:
        return std::nullopt;
    }
}

std::string remap( const std::string& code )
{
    if ( code == "E-TYPE-001" )
        return "E-VO-004";
    if ( code == "E-TYPE-011" )
        return "E-VO-006";
    return "E-VO-005";
}

void collect_variables( const Ltl& f, const specml::CompiledMachine& m, std::set< std::string >& out )
{
    if ( f.op == LtlOp::state || f.op == LtlOp::ba )
    {
        for ( bool pre : { false, true } )
            for ( const auto& v : specml::free_identifiers( f.predicate, pre ) )
                if ( m.variable_index( v ) >= 0 )
                    out.insert( v );
    }
    for ( const auto& a : f.args )
        collect_variables( a, m, out );
}

} // namespace

Ltl Ltl::make( LtlOp op, std::vector< Ltl > args, Span span )
{
    Ltl f;
    f.op = op;
    f.args = std::move( args );
    f.span = span;
    return f;
}

Ltl Ltl::atom( LtlOp op, specml::Expr predicate, Span span )
{
    Ltl f;
    f.op = op;
    f.predicate = std::move( predicate );
    f.span = span;
    return f;
}

bool same( const Ltl& a, const Ltl& b )
{
    if ( a.op != b.op || a.args.size() != b.args.size() )
        return false;
    if ( ( a.op == LtlOp::state || a.op == LtlOp::ba ) && !specml::same( a.predicate, b.predicate ) )
        return false;
    for ( std::size_t i = 0; i < a.args.size(); ++i )
        if ( !same( a.args[ i ], b.args[ i ] ) )
            return false;
    return true;
}

bool is_temporal( const Ltl& f )
{
    if ( f.op == LtlOp::globally || f.op == LtlOp::finally || f.op == LtlOp::next || f.op == LtlOp::until )
        return true;
    return std::ranges::any_of( f.args, []( const Ltl& a ) { return is_temporal( a ); } );
}

std::size_t depth( const Ltl& f )
{
    std::size_t d = 0;
    for ( const auto& a : f.args )
        d = std::max( d, depth( a ) );
    return f.args.empty() ? 0 : d + 1;
}

Ltl parse_ltl( std::string_view text )
{
    TokenStream ts{ tokenize( text, { .newlines = false } ) };
    Ltl f = LtlParser{ ts }.formula();
    if ( !ts.at_end() )
        ts.fail( std::string{ syntax }, "unexpected " + describe( ts.peek() ) + " after formula" );
    return f;
}

std::string print( const Ltl& f ) { return print_ltl( f, false ); }

std::string_view to_string( TaskKind kind )
{
    switch ( kind )
    {
    case TaskKind::ltl:
        return "LTL";
    case TaskKind::inv:
        return "INV";
    case TaskKind::trace:
        return "TRACE";
    case TaskKind::exists:
        return "EXISTS";
    }
    return "?";
}

std::vector< Requirement > parse_requirements( std::string_view text )
{
    std::vector< Requirement > out;
    std::set< std::string > seen;
    std::istringstream in{ std::string{ text } };
    std::string line;
    int number = 0;
    while ( std::getline( in, line ) )
    {
        ++number;
        auto hash = line.find( '#' );
        std::string body = trim( hash == std::string::npos ? line : line.substr( 0, hash ) );
        if ( body.empty() )
            continue;
        Span span{ number, static_cast< int >( line.find_first_not_of( " \t" ) ) + 1 };
        std::size_t i = 0;
        if ( !is_ident_start( body[ 0 ] ) )
            throw ParseError( "E-SYNTAX-041", "expected a requirement id", span );
        while ( i < body.size() && is_ident_char( body[ i ] ) )
            ++i;
        std::string id = body.substr( 0, i );
        std::string rest = trim( std::string_view{ body }.substr( i ) );
        if ( rest.empty() || rest[ 0 ] != ':' )
            throw ParseError( "E-SYNTAX-041", "expected ':' after requirement id '" + id + "'", span );
        if ( !seen.insert( id ).second )
            throw ParseError( "E-VO-001", "requirement '" + id + "' is declared twice", span );
        out.push_back( Requirement{ id, trim( std::string_view{ rest }.substr( 1 ) ), span } );
    }
    return out;
}

ValidationObligation parse_vo( std::string_view text )
{
    TokenStream ts{ tokenize( text, { .newlines = false } ) };
    ValidationObligation vo = VoParser{ ts }.obligation();
    if ( !ts.at_end() )
        ts.fail( std::string{ syntax }, "unexpected " + describe( ts.peek() ) );
    return vo;
}

VOFile parse_vo_file( std::string_view text )
{
    VOFile file;
    // `@note` lines carry free text, so they are cut out before tokenizing.
    std::string cleaned;
    std::istringstream in{ std::string{ text } };
    std::string line;
    int number = 0;
    while ( std::getline( in, line ) )
    {
        ++number;
        std::string body = trim( line );
        if ( body.starts_with( "@note" ) )
        {
            std::string rest = trim( std::string_view{ body }.substr( 5 ) );
            auto slash = rest.find( '/' );
            auto colon = rest.find( ':' );
            if ( slash == std::string::npos || colon == std::string::npos || colon < slash )
                throw ParseError( std::string{ syntax }, "expected '@note REQ/Model: text'", Span{ number, 1 } );
            file.notes.push_back( Note{ { trim( rest.substr( 0, slash ) ), trim( rest.substr( slash + 1, colon - slash - 1 ) ) },
                                        trim( rest.substr( colon + 1 ) ) } );
            line.clear();
        }
        cleaned += line;
        cleaned += '\n';
    }

    TokenStream ts{ tokenize( cleaned ) };
    std::set< VOId > seen;
    ts.skip_newlines();
    while ( !ts.at_end() )
    {
        ValidationObligation vo = VoParser{ ts }.obligation();
        ts.expect_line_end( syntax );
        ts.skip_newlines();
        if ( !seen.insert( vo.id ).second )
            throw ParseError( "E-VO-009", "obligation '" + vo.id.str() + "' is declared twice", vo.span );
        file.obligations.push_back( std::move( vo ) );
    }
    return file;
}

std::string print( const Task& t )
{
    std::string out;
    if ( !t.label.empty() )
        out += t.label + " := ";
    out += to_string( t.kind );
    out += "(";
    switch ( t.kind )
    {
    case TaskKind::ltl:
        out += print( *t.ltl );
        break;
    case TaskKind::inv:
    case TaskKind::exists:
        out += specml::print( *t.predicate );
        break;
    case TaskKind::trace:
    {
        bool first = true;
        for ( const auto& s : t.scenario->steps )
        {
            out += first ? "" : "; ";
            out += print_step( s );
            first = false;
        }
        if ( t.scenario->final )
            out += ( first ? "{" : "; {" ) + specml::print( *t.scenario->final ) + "}";
        break;
    }
    }
    out += ")";
    if ( t.explicit_scope )
    {
        out += "[";
        for ( std::size_t i = 0; i < t.scope.size(); ++i )
            out += ( i ? ", " : "" ) + t.scope[ i ];
        out += "]";
    }
    return out;
}

std::string print( const VOExpr& e ) { return print_expr( e, NodeKind::task ); }

std::string print( const ValidationObligation& vo ) { return vo.id.str() + ": " + print( vo.expr ); }

// The canonical print covers every structural field, so equal prints mean
// equal trees.
bool same( const VOExpr& a, const VOExpr& b ) { return print( a ) == print( b ); }

bool same( const ValidationObligation& a, const ValidationObligation& b ) { return print( a ) == print( b ); }

std::size_t binding_index( const specml::CompiledMachine& m, const specml::CompiledEvent& ev, const TraceStep& step )
{
    auto fail = [&]( const std::string& message ) -> std::size_t {
        throw Error( "E-VO-008", message, step.span );
    };
    if ( step.positional.size() > ev.parameters.size() )
        return fail( "event '" + ev.name + "' takes " + std::to_string( ev.parameters.size() ) + " parameter(s)" );
    std::vector< std::optional< specml::Value > > values( ev.parameters.size() );
    for ( std::size_t i = 0; i < step.positional.size(); ++i )
    {
        values[ i ] = constant_value( m, step.positional[ i ] );
        if ( !values[ i ] )
            return fail( "binding '" + specml::print( step.positional[ i ] ) + "' is not a constant" );
    }
    for ( const auto& [ name, expr ] : step.named )
    {
        auto it = std::ranges::find( ev.parameters, name );
        if ( it == ev.parameters.end() )
            return fail( "event '" + ev.name + "' has no parameter '" + name + "'" );
        auto i = static_cast< std::size_t >( it - ev.parameters.begin() );
        if ( values[ i ] )
            return fail( "parameter '" + name + "' is bound twice" );
        values[ i ] = constant_value( m, expr );
        if ( !values[ i ] )
            return fail( "binding '" + specml::print( expr ) + "' is not a constant" );
    }
    std::vector< specml::Value > binding;
    for ( std::size_t i = 0; i < values.size(); ++i )
    {
        if ( !values[ i ] )
            return fail( "parameter '" + ev.parameters[ i ] + "' of '" + ev.name + "' is not bound" );
        if ( !ev.parameter_domains[ i ].contains( *values[ i ] ) )
            return fail( "value for '" + ev.parameters[ i ] + "' is outside its type" );
        binding.push_back( *values[ i ] );
    }
    auto it = std::ranges::find( ev.bindings, binding );
    if ( it == ev.bindings.end() )
        return fail( "no binding of '" + ev.name + "' matches" );
    return static_cast< std::size_t >( it - ev.bindings.begin() );
}

Diagnostics resolve( ValidationObligation& vo, const ResolveContext& context )
{
    Diagnostics out;
    if ( context.requirements && !context.requirements->contains( vo.id.requirement ) )
        out.push_back( make_error( "E-VO-002", "unknown requirement '" + vo.id.requirement + "'", vo.span ) );
    const specml::CompiledMachine* m = nullptr;
    if ( context.machines )
    {
        auto it = context.machines->find( vo.id.model );
        if ( it != context.machines->end() )
            m = &it->second;
    }
    if ( !m )
    {
        out.push_back( make_error( "E-VO-003", "unknown or ill-typed machine '" + vo.id.model + "'", vo.span ) );
        return out;
    }

    // Refinement chain of the target, closest first.
    std::vector< const specml::MachineSpec* > chain{ &m->spec };
    if ( context.specs )
    {
        std::set< std::string > visited{ m->spec.name };
        while ( chain.back()->refines )
        {
            auto it = std::ranges::find_if( *context.specs,
                                            [&]( const auto& s ) { return s.name == *chain.back()->refines; } );
            if ( it == context.specs->end() || !visited.insert( it->name ).second )
                break;
            chain.push_back( &*it );
        }
    }

    auto check = [&]( const specml::Expr& p, bool allow_pre, std::set< std::string >& vars ) {
        try
        {
            auto c = specml::compile_predicate( *m, p, allow_pre );
            vars.insert( c.variables.begin(), c.variables.end() );
        }
        catch ( const Error& e )
        {
            out.push_back( make_error( remap( e.code() ), e.what(), e.span() ) );
        }
    };

    for_each_task( vo.expr, [&]( Task& t ) {
        std::set< std::string > vars;
        switch ( t.kind )
        {
        case TaskKind::ltl:
        {
            auto visit = [&]( auto&& self, const Ltl& f ) -> void {
                if ( f.op == LtlOp::state )
                    check( f.predicate, false, vars );
                else if ( f.op == LtlOp::ba )
                    check( f.predicate, true, vars );
                for ( const auto& a : f.args )
                    self( self, a );
            };
            visit( visit, *t.ltl );
            collect_variables( *t.ltl, *m, vars );
            break;
        }
        case TaskKind::inv:
        case TaskKind::exists:
            check( *t.predicate, false, vars );
            break;
        case TaskKind::trace:
            for ( const auto& s : t.scenario->steps )
            {
                int e = m->event_index( s.event );
                if ( e < 0 )
                {
                    out.push_back( make_error( "E-VO-004", "unknown event '" + s.event + "' in " + m->name(), s.span ) );
                    continue;
                }
                try
                {
                    binding_index( *m, m->events[ static_cast< std::size_t >( e ) ], s );
                }
                catch ( const Error& err )
                {
                    out.push_back( err.diagnostic() );
                }
            }
            if ( t.scenario->final )
                check( *t.scenario->final, false, vars );
            break;
        }

        if ( t.explicit_scope )
        {
            if ( context.frame )
                for ( const auto& d : t.scope )
                    if ( !context.frame->domain( d ) )
                        out.push_back( make_error( "E-VO-007", "scope names unknown domain '" + d + "'", t.span ) );
            return;
        }
        std::set< std::string > scope;
        for ( const auto& v : vars )
            for ( const auto* spec : chain )
                if ( std::ranges::any_of( spec->variables, [&]( const auto& d ) { return d.name == v; } ) )
                    scope.insert( spec->implements.begin(), spec->implements.end() );
        if ( scope.empty() )
            scope.insert( m->spec.implements.begin(), m->spec.implements.end() );
        t.scope.assign( scope.begin(), scope.end() );
    } );
    return out;
}

std::vector< std::string > scope_of( const ValidationObligation& vo )
{
    std::set< std::string > all;
    for_each_task( vo.expr, [&]( const Task& t ) { all.insert( t.scope.begin(), t.scope.end() ); } );
    return { all.begin(), all.end() };
}

} // namespace vdd::volang
