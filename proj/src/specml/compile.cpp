#include "vdd/specml/model.hpp"
#include "vdd/specml/parser.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

namespace vdd::specml
{

namespace
{

[[noreturn]] void type_error( const char* code, const std::string& message, Span span )
{
    throw Error( code, message, span );
}

struct BinarySpelling
{
    std::string_view text;
    Op op;
};

constexpr BinarySpelling binary_ops[] = {
    { "&", Op::and_ },
    { "or", Op::or_ },
    { "=>", Op::implies },
    { "<=>", Op::iff },
    { "=", Op::eq },
    { "/=", Op::ne },
    { "<", Op::lt },
    { "<=", Op::le },
    { ">", Op::gt },
    { ">=", Op::ge },
    { ":", Op::member },
    { "/:", Op::not_member },
    { "<:", Op::subset },
    { "|->", Op::maplet },
    { "\\/", Op::set_union },
    { "/\\", Op::set_intersection },
    { "\\", Op::set_difference },
    { "<+", Op::override_ },
    { "<|", Op::domain_restriction },
    { "<<|", Op::domain_subtraction },
    { "..", Op::range },
    { "+", Op::add },
    { "-", Op::sub },
    { "*", Op::mul },
    { "/", Op::div },
    { "mod", Op::mod },
};

Op binary_op( const std::string& text, Span span )
{
    for ( const auto& b : binary_ops )
        if ( b.text == text )
            return b.op;
    type_error( "E-TYPE-002", "unknown operator '" + text + "'", span );
}

// Collects the top-level conjuncts of a predicate.
void conjuncts( const Expr& e, std::vector< const Expr* >& out )
{
    if ( e.kind == ExprKind::binary && e.op == "&" )
    {
        conjuncts( e.args[ 0 ], out );
        conjuncts( e.args[ 1 ], out );
    }
    else
        out.push_back( &e );
}

const Expr* find_generator( const Expr& body, const std::string& name, bool universal )
{
    const Expr* search = &body;
    if ( universal )
    {
        if ( body.kind != ExprKind::binary || body.op != "=>" )
            return nullptr;
        search = &body.args[ 0 ];
    }
    std::vector< const Expr* > parts;
    conjuncts( *search, parts );
    for ( const Expr* c : parts )
        if ( c->kind == ExprKind::binary && c->op == ":" && c->args[ 0 ].kind == ExprKind::identifier
             && c->args[ 0 ].op == name )
            return &c->args[ 1 ];
    return nullptr;
}

class Compiler
{
    const CompiledMachine& _m;
    bool _allow_pre;
    bool _allow_variables;
    std::string _variables_forbidden_code;

    struct Local
    {
        std::string name;
        int slot;
        Type type;
    };

    std::vector< Local > _scope;
    std::size_t _next_slot = 0;

public:
    std::size_t max_slots = 0;
    std::vector< std::string > referenced;

    Compiler( const CompiledMachine& m, bool allow_pre, bool allow_variables,
              std::string forbidden_code = "E-TYPE-008" )
        : _m{ m }, _allow_pre{ allow_pre }, _allow_variables{ allow_variables },
          _variables_forbidden_code{ std::move( forbidden_code ) }
    {
    }

    int bind( const std::string& name, Type type )
    {
        int slot = static_cast< int >( _next_slot++ );
        max_slots = std::max( max_slots, _next_slot );
        _scope.push_back( Local{ name, slot, std::move( type ) } );
        return slot;
    }

    CExpr predicate( const Expr& e )
    {
        CExpr c = compile( e );
        expect( c, Type::boolean(), "predicate", e.span );
        return c;
    }

    CExpr compile( const Expr& e )
    {
        CExpr out;
        out.span = e.span;
        switch ( e.kind )
        {
        case ExprKind::integer:
            out.constant = Value::integer( e.value );
            out.type = Type::integer();
            return out;
        case ExprKind::boolean:
            out.constant = Value::boolean( e.value != 0 );
            out.type = Type::boolean();
            return out;
        case ExprKind::identifier:
            return identifier( e );
        case ExprKind::pre_identifier:
        {
            if ( !_allow_pre )
                type_error( "E-TYPE-011", "'" + e.op + "$0' is only allowed inside a before-after predicate",
                            e.span );
            int slot = _m.variable_index( e.op );
            if ( slot < 0 )
                type_error( "E-TYPE-001", "unknown variable '" + e.op + "'", e.span );
            note_variable( e.op );
            out.op = Op::pre_variable;
            out.slot = slot;
            out.type = _m.domains[ static_cast< std::size_t >( slot ) ].type();
            return out;
        }
        case ExprKind::unary:
        {
            out.args.push_back( compile( e.args[ 0 ] ) );
            if ( e.op == "not" )
            {
                out.op = Op::not_;
                expect( out.args[ 0 ], Type::boolean(), "operand of 'not'", e.span );
                out.type = Type::boolean();
            }
            else
            {
                out.op = Op::negate;
                expect( out.args[ 0 ], Type::integer(), "operand of unary '-'", e.span );
                out.type = Type::integer();
            }
            return out;
        }
        case ExprKind::binary:
            return binary( e );
        case ExprKind::set_literal:
        {
            out.op = Op::set_literal;
            Type element = Type::any();
            for ( const auto& a : e.args )
            {
                out.args.push_back( compile( a ) );
                const Type& t = out.args.back().type;
                if ( !compatible( element, t ) )
                    type_error( "E-TYPE-002", "set literal mixes " + to_string( element, _m.universe ) + " and "
                                                  + to_string( t, _m.universe ),
                                a.span );
                element = unify( element, t );
            }
            out.type = Type::set_of( element );
            return out;
        }
        case ExprKind::call:
            return call( e );
        case ExprKind::apply:
        {
            out.op = Op::apply;
            out.args.push_back( compile( e.args[ 0 ] ) );
            out.args.push_back( compile( e.args[ 1 ] ) );
            const Type& f = out.args[ 0 ].type;
            if ( !f.is_relation() )
                type_error( "E-TYPE-002", "only functions can be applied, found " + to_string( f, _m.universe ),
                            e.span );
            const Type& pair = f.parts[ 0 ];
            if ( pair.kind == Type::Kind::any )
            {
                out.type = Type::any();
                return out;
            }
            expect( out.args[ 1 ], pair.parts[ 0 ], "function argument", e.args[ 1 ].span );
            out.type = pair.parts[ 1 ];
            return out;
        }
        case ExprKind::quantifier:
            return quantifier( e );
        }
        return out;
    }

private:
    void note_variable( const std::string& name )
    {
        if ( std::find( referenced.begin(), referenced.end(), name ) == referenced.end() )
            referenced.push_back( name );
    }

    void expect( const CExpr& c, const Type& t, const std::string& what, Span span ) const
    {
        if ( !compatible( c.type, t ) )
            type_error( "E-TYPE-002",
                        what + " must be " + to_string( t, _m.universe ) + ", found " + to_string( c.type, _m.universe ),
                        span );
    }

    void expect_set( const CExpr& c, const std::string& what, Span span ) const
    {
        if ( !c.type.is_set() && c.type.kind != Type::Kind::any )
            type_error( "E-TYPE-002", what + " must be a set, found " + to_string( c.type, _m.universe ), span );
    }

    void expect_relation( const CExpr& c, const std::string& what, Span span ) const
    {
        if ( !c.type.is_relation() && c.type.kind != Type::Kind::any )
            type_error( "E-TYPE-002", what + " must be a relation, found " + to_string( c.type, _m.universe ),
                        span );
    }

    static Type element_of( const Type& set )
    {
        return set.kind == Type::Kind::set ? set.parts[ 0 ] : Type::any();
    }

    static Type pair_part( const Type& relation, std::size_t i )
    {
        Type p = element_of( relation );
        return p.kind == Type::Kind::pair ? p.parts[ i ] : Type::any();
    }

    CExpr identifier( const Expr& e )
    {
        CExpr out;
        out.span = e.span;
        for ( auto it = _scope.rbegin(); it != _scope.rend(); ++it )
        {
            if ( it->name == e.op )
            {
                out.op = Op::local;
                out.slot = it->slot;
                out.type = it->type;
                return out;
            }
        }
        int slot = _m.variable_index( e.op );
        if ( slot >= 0 )
        {
            if ( !_allow_variables )
                type_error( _variables_forbidden_code.c_str(), "variable '" + e.op + "' cannot be read here", e.span );
            note_variable( e.op );
            out.op = Op::variable;
            out.slot = slot;
            out.type = _m.domains[ static_cast< std::size_t >( slot ) ].type();
            return out;
        }
        if ( auto c = _m.constants.find( e.op ); c != _m.constants.end() )
        {
            out.constant = c->second.value;
            out.type = c->second.type;
            return out;
        }
        if ( auto el = _m.elements.find( e.op ); el != _m.elements.end() )
        {
            out.constant = el->second;
            out.type = Type::element( el->second.carrier() );
            return out;
        }
        if ( e.op == "BOOL" )
        {
            out.constant = Value::set( { Value::boolean( false ), Value::boolean( true ) } );
            out.type = Type::set_of( Type::boolean() );
            return out;
        }
        type_error( "E-TYPE-001", "unknown identifier '" + e.op + "'", e.span );
    }

    CExpr binary( const Expr& e )
    {
        CExpr out;
        out.span = e.span;
        out.op = binary_op( e.op, e.span );
        out.args.push_back( compile( e.args[ 0 ] ) );
        out.args.push_back( compile( e.args[ 1 ] ) );
        const CExpr& a = out.args[ 0 ];
        const CExpr& b = out.args[ 1 ];
        const std::string what = "operand of '" + e.op + "'";
        switch ( out.op )
        {
        case Op::and_:
        case Op::or_:
        case Op::implies:
        case Op::iff:
            expect( a, Type::boolean(), what, e.args[ 0 ].span );
            expect( b, Type::boolean(), what, e.args[ 1 ].span );
            out.type = Type::boolean();
            break;
        case Op::eq:
        case Op::ne:
            if ( !compatible( a.type, b.type ) )
                type_error( "E-TYPE-002",
                            "cannot compare " + to_string( a.type, _m.universe ) + " with "
                                + to_string( b.type, _m.universe ),
                            e.span );
            out.type = Type::boolean();
            break;
        case Op::lt:
        case Op::le:
        case Op::gt:
        case Op::ge:
            expect( a, Type::integer(), what, e.args[ 0 ].span );
            expect( b, Type::integer(), what, e.args[ 1 ].span );
            out.type = Type::boolean();
            break;
        case Op::member:
        case Op::not_member:
            expect_set( b, what, e.args[ 1 ].span );
            expect( a, element_of( b.type ), "element", e.args[ 0 ].span );
            out.type = Type::boolean();
            break;
        case Op::subset:
            expect_set( a, what, e.args[ 0 ].span );
            expect( b, a.type.kind == Type::Kind::any ? Type::set_of( Type::any() ) : a.type, what, e.args[ 1 ].span );
            out.type = Type::boolean();
            break;
        case Op::maplet:
            out.type = Type::pair( a.type, b.type );
            break;
        case Op::set_union:
        case Op::set_intersection:
        case Op::set_difference:
            expect_set( a, what, e.args[ 0 ].span );
            expect_set( b, what, e.args[ 1 ].span );
            if ( !compatible( a.type, b.type ) )
                type_error( "E-TYPE-002",
                            "set operands differ: " + to_string( a.type, _m.universe ) + " and "
                                + to_string( b.type, _m.universe ),
                            e.span );
            out.type = unify( a.type, b.type );
            break;
        case Op::override_:
            expect_relation( a, what, e.args[ 0 ].span );
            expect_relation( b, what, e.args[ 1 ].span );
            if ( !compatible( a.type, b.type ) )
                type_error( "E-TYPE-002", "override operands differ", e.span );
            out.type = unify( a.type, b.type );
            break;
        case Op::domain_restriction:
        case Op::domain_subtraction:
            expect_set( a, what, e.args[ 0 ].span );
            expect_relation( b, what, e.args[ 1 ].span );
            if ( !compatible( element_of( a.type ), pair_part( b.type, 0 ) ) )
                type_error( "E-TYPE-002", "restriction set does not match the relation's domain", e.span );
            out.type = b.type;
            break;
        case Op::range:
            expect( a, Type::integer(), what, e.args[ 0 ].span );
            expect( b, Type::integer(), what, e.args[ 1 ].span );
            out.type = Type::set_of( Type::integer() );
            break;
        default:
            expect( a, Type::integer(), what, e.args[ 0 ].span );
            expect( b, Type::integer(), what, e.args[ 1 ].span );
            out.type = Type::integer();
            break;
        }
        return out;
    }

    CExpr call( const Expr& e )
    {
        CExpr out;
        out.span = e.span;
        for ( const auto& a : e.args )
            out.args.push_back( compile( a ) );
        auto arity = [ & ]( std::size_t lo, std::size_t hi ) {
            if ( out.args.size() < lo || out.args.size() > hi )
                type_error( "E-TYPE-002", e.op + " takes " + std::to_string( lo )
                                              + ( lo == hi ? "" : " or " + std::to_string( hi ) ) + " argument(s)",
                            e.span );
        };
        const std::string what = "argument of " + e.op;
        if ( e.op == "card" )
        {
            arity( 1, 1 );
            expect_set( out.args[ 0 ], what, e.span );
            out.op = Op::card;
            out.type = Type::integer();
        }
        else if ( e.op == "dom" || e.op == "ran" )
        {
            arity( 1, 1 );
            expect_relation( out.args[ 0 ], what, e.span );
            out.op = e.op == "dom" ? Op::dom : Op::ran;
            out.type = Type::set_of( pair_part( out.args[ 0 ].type, e.op == "dom" ? 0 : 1 ) );
        }
        else if ( e.op == "DIST" )
        {
            arity( 1, 2 );
            if ( out.args.size() == 1 )
                expect( out.args[ 0 ], Type::pair( Type::integer(), Type::integer() ), what, e.span );
            else
            {
                expect( out.args[ 0 ], Type::integer(), what, e.span );
                expect( out.args[ 1 ], Type::integer(), what, e.span );
            }
            out.op = Op::dist;
            out.type = Type::integer();
        }
        else if ( e.op == "abs" )
        {
            arity( 1, 1 );
            expect( out.args[ 0 ], Type::integer(), what, e.span );
            out.op = Op::abs;
            out.type = Type::integer();
        }
        else
        {
            arity( 1, 2 );
            if ( out.args.size() == 1 )
                expect( out.args[ 0 ], Type::set_of( Type::integer() ), what, e.span );
            else
            {
                expect( out.args[ 0 ], Type::integer(), what, e.span );
                expect( out.args[ 1 ], Type::integer(), what, e.span );
            }
            out.op = e.op == "min" ? Op::min : Op::max;
            out.type = Type::integer();
        }
        return out;
    }

    CExpr quantifier( const Expr& e )
    {
        CExpr out;
        out.span = e.span;
        out.op = e.op == "forall" ? Op::forall : Op::exists;
        out.type = Type::boolean();
        const Expr& body = e.args[ 0 ];
        auto scope_size = _scope.size();
        auto slot_mark = _next_slot;
        std::vector< CExpr > generators;
        for ( const auto& name : e.bound )
        {
            const Expr* gen = find_generator( body, name, out.op == Op::forall );
            if ( !gen )
                type_error( "E-TYPE-005",
                            "cannot infer a range for '" + name + "'; add a conjunct '" + name + " : S'"
                                + ( out.op == Op::forall ? " to the antecedent" : "" ),
                            e.span );
            CExpr g = compile( *gen );
            expect_set( g, "range of '" + name + "'", gen->span );
            Type element = element_of( g.type );
            generators.push_back( std::move( g ) );
            out.bound.push_back( bind( name, element ) );
        }
        out.args.push_back( predicate( body ) );
        for ( auto& g : generators )
            out.args.push_back( std::move( g ) );
        _scope.resize( scope_size );
        _next_slot = slot_mark;
        return out;
    }
};

// ------------------------------------------------------------ machine

class MachineCompiler
{
    const MachineSpec& _spec;
    std::span< const ContextSpec > _contexts;
    std::span< const MachineSpec > _machines;
    const CompileOptions& _options;
    CompiledMachine _m;
    Diagnostics _diagnostics;

    void report( const Error& e ) { _diagnostics.push_back( e.diagnostic() ); }

    void report( const char* code, const std::string& message, Span span )
    {
        _diagnostics.push_back( make_error( code, message, span ) );
    }

    template < typename F >
    void guarded( F&& f )
    {
        try
        {
            f();
        }
        catch ( const Error& e )
        {
            report( e );
        }
    }

public:
    MachineCompiler( const MachineSpec& spec, std::span< const ContextSpec > contexts,
                     std::span< const MachineSpec > machines, const CompileOptions& options )
        : _spec{ spec }, _contexts{ contexts }, _machines{ machines }, _options{ options }
    {
        _m.spec = spec;
    }

    CompileResult run()
    {
        contexts();
        variables();
        events();
        invariants();
        refinement();
        CompileResult result;
        result.diagnostics = std::move( _diagnostics );
        if ( !has_errors( result.diagnostics ) )
            result.machine = std::move( _m );
        return result;
    }

private:
    void contexts()
    {
        std::set< std::string, std::less<> > seen;
        for ( const auto& name : _spec.sees )
        {
            if ( !seen.insert( name ).second )
            {
                report( "E-TYPE-009", "context '" + name + "' is seen twice", _spec.span );
                continue;
            }
            auto it = std::find_if( _contexts.begin(), _contexts.end(),
                                    [ & ]( const ContextSpec& c ) { return c.name == name; } );
            if ( it == _contexts.end() )
            {
                report( "E-TYPE-009", "unknown context '" + name + "'", _spec.span );
                continue;
            }
            load( *it );
        }
    }

    bool name_taken( const std::string& name ) const
    {
        return _m.constants.contains( name ) || _m.elements.contains( name );
    }

    void load( const ContextSpec& ctx )
    {
        for ( const auto& set : ctx.sets )
        {
            if ( name_taken( set.name ) )
            {
                report( "E-TYPE-012", "'" + set.name + "' is declared twice", set.span );
                continue;
            }
            auto carrier = static_cast< std::uint32_t >( _m.universe.carriers.size() );
            _m.universe.carriers.push_back( Carrier{ set.name, set.elements } );
            std::vector< Value > members;
            for ( std::uint32_t i = 0; i < set.elements.size(); ++i )
            {
                const auto& el = set.elements[ i ];
                if ( name_taken( el ) || el == set.name )
                {
                    report( "E-TYPE-012", "'" + el + "' is declared twice", set.span );
                    continue;
                }
                _m.elements.emplace( el, Value::element( carrier, i ) );
                members.push_back( Value::element( carrier, i ) );
            }
            _m.constants.emplace( set.name, NamedValue{ Value::sorted_set( std::move( members ) ),
                                                        Type::set_of( Type::element( carrier ) ) } );
        }
        for ( const auto& k : ctx.constants )
        {
            if ( name_taken( k.name ) )
            {
                report( "E-TYPE-012", "'" + k.name + "' is declared twice", k.span );
                continue;
            }
            guarded( [ & ] {
                Compiler c{ _m, false, false };
                CExpr e = c.compile( k.value );
                std::vector< Value > locals( c.max_slots );
                Env env{ nullptr, nullptr, &locals };
                try
                {
                    _m.constants.emplace( k.name, NamedValue{ evaluate( e, env ), e.type } );
                }
                catch ( const EvalError& err )
                {
                    throw Error( err.code(), "constant '" + k.name + "': " + err.diagnostic().message, k.span );
                }
            } );
        }
    }

    std::int64_t constant_int( const Expr& e )
    {
        Compiler c{ _m, false, false, "E-TYPE-003" };
        CExpr ce = c.compile( e );
        if ( ce.type.kind != Type::Kind::integer )
            type_error( "E-TYPE-002", "range bound must be an integer", e.span );
        std::vector< Value > locals( c.max_slots );
        return evaluate( ce, Env{ nullptr, nullptr, &locals } ).as_int();
    }

    Domain domain( const DeclType& t )
    {
        Domain d;
        switch ( t.kind )
        {
        case DeclType::Kind::boolean:
            d.kind = Domain::Kind::boolean;
            break;
        case DeclType::Kind::integer:
        case DeclType::Kind::natural:
            type_error( "E-TYPE-003", std::string{ t.kind == DeclType::Kind::integer ? "INT" : "NAT" }
                                          + " is not finite; use a range lo..hi",
                        t.span );
        case DeclType::Kind::range:
            d.kind = Domain::Kind::range;
            d.lo = constant_int( t.bounds[ 0 ] );
            d.hi = constant_int( t.bounds[ 1 ] );
            break;
        case DeclType::Kind::carrier:
        {
            auto it = std::find_if( _m.universe.carriers.begin(), _m.universe.carriers.end(),
                                    [ & ]( const Carrier& c ) { return c.name == t.name; } );
            if ( it == _m.universe.carriers.end() )
                type_error( "E-TYPE-001", "unknown carrier set '" + t.name + "'", t.span );
            d.kind = Domain::Kind::carrier;
            d.carrier = static_cast< std::uint32_t >( it - _m.universe.carriers.begin() );
            d.carrier_size = static_cast< std::uint32_t >( it->elements.size() );
            break;
        }
        case DeclType::Kind::set_of:
            d.kind = Domain::Kind::powerset;
            d.parts.push_back( domain( t.parts[ 0 ] ) );
            break;
        case DeclType::Kind::partial_function:
        case DeclType::Kind::total_function:
            d.kind = t.kind == DeclType::Kind::partial_function ? Domain::Kind::partial_function
                                                                 : Domain::Kind::total_function;
            d.parts.push_back( domain( t.parts[ 0 ] ) );
            d.parts.push_back( domain( t.parts[ 1 ] ) );
            break;
        }
        return d;
    }

    Domain finite_domain( const DeclType& t, const std::string& owner )
    {
        Domain d = domain( t );
        double n = d.cardinality();
        if ( !std::isfinite( n ) || n > _options.max_type_cardinality )
            type_error( "E-TYPE-004", "type of '" + owner + "' has too many values", t.span );
        return d;
    }

    void variables()
    {
        std::set< std::string, std::less<> > seen;
        for ( const auto& v : _spec.variables )
        {
            if ( !seen.insert( v.name ).second || name_taken( v.name ) )
            {
                report( "E-TYPE-012", "'" + v.name + "' is declared twice", v.span );
                continue;
            }
            Domain d;
            try
            {
                d = finite_domain( v.type, v.name );
            }
            catch ( const Error& e )
            {
                report( e );
                // Keep the slot so later references resolve; BOOL is a harmless placeholder.
            }
            _m.variables.push_back( v.name );
            _m.domains.push_back( std::move( d ) );
        }
    }

    std::optional< CompiledEvent > event( const EventSpec& ev )
    {
        bool init = ev.is_initialisation();
        CompiledEvent out;
        out.name = ev.name;
        out.span = ev.span;
        Compiler c{ _m, false, !init };
        std::set< std::string, std::less<> > seen;
        bool ok = true;
        for ( const auto& p : ev.parameters )
        {
            if ( !seen.insert( p.name ).second || _m.variable_index( p.name ) >= 0 )
            {
                report( "E-TYPE-012", "parameter '" + p.name + "' clashes with another name", p.span );
                ok = false;
                continue;
            }
            try
            {
                Domain d = finite_domain( p.type, p.name );
                out.parameters.push_back( p.name );
                c.bind( p.name, d.type() );
                out.parameter_domains.push_back( std::move( d ) );
            }
            catch ( const Error& e )
            {
                report( e );
                ok = false;
            }
        }
        if ( !ok )
            return std::nullopt;

        double combinations = 1;
        for ( const auto& d : out.parameter_domains )
            combinations *= d.cardinality();
        if ( combinations > _options.max_bindings )
        {
            report( "E-TYPE-004", "event '" + ev.name + "' has too many parameter bindings", ev.span );
            return std::nullopt;
        }
        out.bindings.emplace_back();
        for ( const auto& d : out.parameter_domains )
        {
            std::vector< std::vector< Value > > next;
            auto values = d.enumerate();
            for ( const auto& prefix : out.bindings )
                for ( const auto& v : values )
                {
                    auto b = prefix;
                    b.push_back( v );
                    next.push_back( std::move( b ) );
                }
            out.bindings = std::move( next );
        }

        for ( const auto& g : ev.guards )
        {
            try
            {
                out.guards.push_back( c.predicate( g ) );
            }
            catch ( const Error& e )
            {
                report( e );
                ok = false;
            }
        }

        std::set< std::string, std::less<> > assigned;
        for ( const auto& a : ev.actions )
        {
            int slot = _m.variable_index( a.target );
            if ( slot < 0 )
            {
                report( "E-TYPE-013", "'" + a.target + "' is not a variable of " + _spec.name, a.span );
                ok = false;
                continue;
            }
            if ( !assigned.insert( a.target ).second )
            {
                report( "E-TYPE-007", "variable '" + a.target + "' is assigned twice in " + ev.name, a.span );
                ok = false;
                continue;
            }
            try
            {
                CompiledAction act;
                act.slot = slot;
                act.span = a.span;
                Type target = _m.domains[ static_cast< std::size_t >( slot ) ].type();
                act.value = c.compile( a.value );
                if ( a.index )
                {
                    if ( init )
                        type_error( "E-TYPE-013", "INITIALISATION cannot update '" + a.target + "' pointwise",
                                    a.span );
                    if ( !target.is_relation() )
                        type_error( "E-TYPE-013", "'" + a.target + "' is not a function", a.span );
                    act.index = c.compile( *a.index );
                    const Type& pair = target.parts[ 0 ];
                    if ( !compatible( act.index->type, pair.parts[ 0 ] ) )
                        type_error( "E-TYPE-002", "index of '" + a.target + "' has the wrong type", a.index->span );
                    if ( !compatible( act.value.type, pair.parts[ 1 ] ) )
                        type_error( "E-TYPE-002", "value stored in '" + a.target + "' has the wrong type",
                                    a.value.span );
                }
                else if ( !compatible( act.value.type, target ) )
                    type_error( "E-TYPE-002",
                                "cannot assign " + to_string( act.value.type, _m.universe ) + " to '" + a.target
                                    + "' of type " + to_string( target, _m.universe ),
                                a.value.span );
                out.actions.push_back( std::move( act ) );
            }
            catch ( const Error& e )
            {
                report( e );
                ok = false;
            }
        }
        if ( init )
        {
            for ( const auto& v : _m.variables )
                if ( !assigned.contains( v ) )
                {
                    report( "E-TYPE-008", "INITIALISATION does not assign '" + v + "'", ev.span );
                    ok = false;
                }
        }
        _m.locals = std::max( _m.locals, c.max_slots );
        if ( !ok )
            return std::nullopt;
        return out;
    }

    void events()
    {
        std::size_t inits = 0;
        std::set< std::string, std::less<> > names;
        for ( const auto& ev : _spec.events )
        {
            if ( !names.insert( ev.name ).second )
            {
                report( ev.is_initialisation() ? "E-TYPE-006" : "E-TYPE-012",
                        "event '" + ev.name + "' is declared twice", ev.span );
                continue;
            }
            auto compiled = event( ev );
            if ( ev.is_initialisation() )
            {
                ++inits;
                if ( compiled )
                    _m.initialisation = std::move( *compiled );
            }
            else if ( compiled )
                _m.events.push_back( std::move( *compiled ) );
        }
        if ( inits == 0 )
            report( "E-TYPE-006", "machine '" + _spec.name + "' has no INITIALISATION event", _spec.span );
    }

    void invariants()
    {
        std::set< std::string, std::less<> > labels;
        for ( const auto& inv : _spec.invariants )
        {
            if ( !labels.insert( inv.label ).second )
            {
                report( "E-TYPE-012", "invariant label '" + inv.label + "' is used twice", inv.span );
                continue;
            }
            guarded( [ & ] {
                Compiler c{ _m, false, true };
                _m.invariants.push_back( CompiledInvariant{ inv.label, c.predicate( inv.predicate ), inv.span } );
                _m.locals = std::max( _m.locals, c.max_slots );
            } );
        }
    }

    void refinement()
    {
        if ( !_spec.refines )
            return;
        auto it = std::find_if( _machines.begin(), _machines.end(),
                                [ & ]( const MachineSpec& m ) { return m.name == *_spec.refines; } );
        if ( it == _machines.end() )
        {
            report( "E-TYPE-010", "refined machine '" + *_spec.refines + "' is unknown", _spec.span );
            return;
        }
        for ( const auto& v : it->variables )
        {
            bool glued = std::any_of( _spec.gluing.begin(), _spec.gluing.end(),
                                      [ & ]( const GluingNote& g ) { return g.variable == v.name; } );
            if ( !glued )
                report( "E-TYPE-010",
                        "abstract variable '" + v.name + "' of " + it->name + " has no '# @glue " + v.name
                            + ": ...' note",
                        _spec.span );
        }
    }
};

} // namespace

int CompiledMachine::variable_index( std::string_view name ) const
{
    auto it = std::find( variables.begin(), variables.end(), name );
    return it == variables.end() ? -1 : static_cast< int >( it - variables.begin() );
}

int CompiledMachine::event_index( std::string_view name ) const
{
    auto it = std::find_if( events.begin(), events.end(), [ & ]( const CompiledEvent& e ) { return e.name == name; } );
    return it == events.end() ? -1 : static_cast< int >( it - events.begin() );
}

std::string CompiledMachine::format_state( const State& s ) const
{
    std::string out;
    for ( std::size_t i = 0; i < variables.size() && i < s.size(); ++i )
    {
        if ( i )
            out += ", ";
        out += variables[ i ] + "=" + to_string( s[ i ], universe );
    }
    return out;
}

std::string CompiledMachine::format_binding( const CompiledEvent& ev, std::size_t binding ) const
{
    std::string out;
    const auto& values = ev.bindings[ binding ];
    for ( std::size_t i = 0; i < ev.parameters.size(); ++i )
    {
        if ( i )
            out += ", ";
        out += ev.parameters[ i ] + "=" + to_string( values[ i ], universe );
    }
    return out;
}

CompileResult compile( const MachineSpec& machine, std::span< const ContextSpec > contexts,
                       std::span< const MachineSpec > machines, const CompileOptions& options )
{
    return MachineCompiler{ machine, contexts, machines, options }.run();
}

Diagnostics typecheck( const MachineSpec& machine, std::span< const ContextSpec > contexts,
                       std::span< const MachineSpec > machines, const CompileOptions& options )
{
    return compile( machine, contexts, machines, options ).diagnostics;
}

CompiledPredicate compile_predicate( const CompiledMachine& machine, const Expr& predicate, bool allow_pre )
{
    Compiler c{ machine, allow_pre, true };
    CompiledPredicate out;
    out.expr = c.predicate( predicate );
    out.locals = c.max_slots;
    out.variables = c.referenced;
    return out;
}

bool holds( const CompiledPredicate& p, const State& post, const State* pre )
{
    std::vector< Value > locals( p.locals );
    return holds( p.expr, Env{ &post, pre, &locals } );
}

} // namespace vdd::specml
