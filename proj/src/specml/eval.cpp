#include "vdd/specml/model.hpp"

#include <algorithm>
#include <iterator>

namespace vdd::specml
{

namespace
{

[[noreturn]] void fail( const char* code, const std::string& message, const CExpr& e )
{
    throw EvalError( code, message, e.span );
}

void checked( bool overflow, const CExpr& e )
{
    if ( overflow )
        fail( "E-EVAL-004", "integer overflow", e );
}

std::int64_t arithmetic( Op op, std::int64_t a, std::int64_t b, const CExpr& e )
{
    std::int64_t r = 0;
    switch ( op )
    {
    case Op::add:
        checked( __builtin_add_overflow( a, b, &r ), e );
        return r;
    case Op::sub:
        checked( __builtin_sub_overflow( a, b, &r ), e );
        return r;
    case Op::mul:
        checked( __builtin_mul_overflow( a, b, &r ), e );
        return r;
    case Op::div:
    case Op::mod:
        if ( b == 0 )
            fail( "E-EVAL-001", op == Op::div ? "division by zero" : "modulo by zero", e );
        if ( a == INT64_MIN && b == -1 )
            fail( "E-EVAL-004", "integer overflow", e );
        return op == Op::div ? a / b : a % b;
    default:
        return 0;
    }
}

Value merge( Op op, const Value& a, const Value& b )
{
    auto x = a.items();
    auto y = b.items();
    std::vector< Value > out;
    switch ( op )
    {
    case Op::set_union:
        std::set_union( x.begin(), x.end(), y.begin(), y.end(), std::back_inserter( out ) );
        break;
    case Op::set_intersection:
        std::set_intersection( x.begin(), x.end(), y.begin(), y.end(), std::back_inserter( out ) );
        break;
    default:
        std::set_difference( x.begin(), x.end(), y.begin(), y.end(), std::back_inserter( out ) );
        break;
    }
    return Value::sorted_set( std::move( out ) );
}

Value domain_of( const Value& relation )
{
    std::vector< Value > out;
    for ( const auto& p : relation.items() )
        if ( out.empty() || !( out.back() == p.first() ) )
            out.push_back( p.first() );
    return Value::sorted_set( std::move( out ) );
}

Value override_with( const Value& f, const Value& g )
{
    Value keys = domain_of( g );
    std::vector< Value > out;
    for ( const auto& p : f.items() )
        if ( !keys.contains( p.first() ) )
            out.push_back( p );
    out.insert( out.end(), g.items().begin(), g.items().end() );
    return Value::set( std::move( out ) );
}

Value restrict( const Value& keys, const Value& relation, bool keep )
{
    std::vector< Value > out;
    for ( const auto& p : relation.items() )
        if ( keys.contains( p.first() ) == keep )
            out.push_back( p );
    return Value::sorted_set( std::move( out ) );
}

Value apply( const Value& f, const Value& x, const CExpr& e )
{
    auto items = f.items();
    auto it = std::partition_point( items.begin(), items.end(), [ & ]( const Value& p ) { return p.first() < x; } );
    if ( it == items.end() || !( it->first() == x ) )
        fail( "E-EVAL-003", "function applied outside its domain", e );
    auto next = it + 1;
    if ( next != items.end() && next->first() == x )
        fail( "E-EVAL-003", "relation is not functional at the argument", e );
    return it->second();
}

bool quantify( const CExpr& e, const Env& env, std::size_t k )
{
    bool universal = e.op == Op::forall;
    if ( k == e.bound.size() )
        return holds( e.args[ 0 ], env );
    Value domain = evaluate( e.args[ k + 1 ], env );
    for ( const auto& v : domain.items() )
    {
        ( *env.locals )[ static_cast< std::size_t >( e.bound[ k ] ) ] = v;
        bool r = quantify( e, env, k + 1 );
        if ( universal && !r )
            return false;
        if ( !universal && r )
            return true;
    }
    return universal;
}

} // namespace

bool holds( const CExpr& e, const Env& env )
{
    return evaluate( e, env ).as_bool();
}

Value evaluate( const CExpr& e, const Env& env )
{
    const auto arg = [ & ]( std::size_t i ) { return evaluate( e.args[ i ], env ); };
    switch ( e.op )
    {
    case Op::constant:
        return e.constant;
    case Op::variable:
        return ( *env.post )[ static_cast< std::size_t >( e.slot ) ];
    case Op::pre_variable:
        return ( *( env.pre ? env.pre : env.post ) )[ static_cast< std::size_t >( e.slot ) ];
    case Op::local:
        return ( *env.locals )[ static_cast< std::size_t >( e.slot ) ];
    case Op::not_:
        return Value::boolean( !holds( e.args[ 0 ], env ) );
    case Op::negate:
        return Value::integer( arithmetic( Op::sub, 0, arg( 0 ).as_int(), e ) );
    case Op::and_:
        return Value::boolean( holds( e.args[ 0 ], env ) && holds( e.args[ 1 ], env ) );
    case Op::or_:
        return Value::boolean( holds( e.args[ 0 ], env ) || holds( e.args[ 1 ], env ) );
    case Op::implies:
        return Value::boolean( !holds( e.args[ 0 ], env ) || holds( e.args[ 1 ], env ) );
    case Op::iff:
        return Value::boolean( holds( e.args[ 0 ], env ) == holds( e.args[ 1 ], env ) );
    case Op::eq:
        return Value::boolean( arg( 0 ) == arg( 1 ) );
    case Op::ne:
        return Value::boolean( !( arg( 0 ) == arg( 1 ) ) );
    case Op::lt:
        return Value::boolean( arg( 0 ).as_int() < arg( 1 ).as_int() );
    case Op::le:
        return Value::boolean( arg( 0 ).as_int() <= arg( 1 ).as_int() );
    case Op::gt:
        return Value::boolean( arg( 0 ).as_int() > arg( 1 ).as_int() );
    case Op::ge:
        return Value::boolean( arg( 0 ).as_int() >= arg( 1 ).as_int() );
    case Op::member:
        return Value::boolean( arg( 1 ).contains( arg( 0 ) ) );
    case Op::not_member:
        return Value::boolean( !arg( 1 ).contains( arg( 0 ) ) );
    case Op::subset:
    {
        Value a = arg( 0 );
        Value b = arg( 1 );
        return Value::boolean(
            std::includes( b.items().begin(), b.items().end(), a.items().begin(), a.items().end() ) );
    }
    case Op::maplet:
        return Value::pair( arg( 0 ), arg( 1 ) );
    case Op::set_union:
    case Op::set_intersection:
    case Op::set_difference:
        return merge( e.op, arg( 0 ), arg( 1 ) );
    case Op::override_:
        return override_with( arg( 0 ), arg( 1 ) );
    case Op::domain_restriction:
        return restrict( arg( 0 ), arg( 1 ), true );
    case Op::domain_subtraction:
        return restrict( arg( 0 ), arg( 1 ), false );
    case Op::range:
    {
        std::int64_t lo = arg( 0 ).as_int();
        std::int64_t hi = arg( 1 ).as_int();
        if ( hi >= lo && hi - lo > 10'000'000 )
            fail( "E-EVAL-004", "integer range too large to materialize", e );
        std::vector< Value > out;
        for ( std::int64_t i = lo; i <= hi; ++i )
            out.push_back( Value::integer( i ) );
        return Value::sorted_set( std::move( out ) );
    }
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div:
    case Op::mod:
        return Value::integer( arithmetic( e.op, arg( 0 ).as_int(), arg( 1 ).as_int(), e ) );
    case Op::set_literal:
    {
        std::vector< Value > items;
        items.reserve( e.args.size() );
        for ( const auto& a : e.args )
            items.push_back( evaluate( a, env ) );
        return Value::set( std::move( items ) );
    }
    case Op::card:
        return Value::integer( static_cast< std::int64_t >( arg( 0 ).size() ) );
    case Op::dom:
        return domain_of( arg( 0 ) );
    case Op::ran:
    {
        std::vector< Value > out;
        for ( const auto& p : arg( 0 ).items() )
            out.push_back( p.second() );
        return Value::set( std::move( out ) );
    }
    case Op::dist:
    {
        std::int64_t a = 0;
        std::int64_t b = 0;
        if ( e.args.size() == 1 )
        {
            Value p = arg( 0 );
            a = p.first().as_int();
            b = p.second().as_int();
        }
        else
        {
            a = arg( 0 ).as_int();
            b = arg( 1 ).as_int();
        }
        std::int64_t d = arithmetic( Op::sub, a, b, e );
        return Value::integer( d < 0 ? arithmetic( Op::sub, 0, d, e ) : d );
    }
    case Op::abs:
    {
        std::int64_t v = arg( 0 ).as_int();
        return Value::integer( v < 0 ? arithmetic( Op::sub, 0, v, e ) : v );
    }
    case Op::min:
    case Op::max:
    {
        if ( e.args.size() == 2 )
        {
            std::int64_t a = arg( 0 ).as_int();
            std::int64_t b = arg( 1 ).as_int();
            return Value::integer( e.op == Op::min ? std::min( a, b ) : std::max( a, b ) );
        }
        Value s = arg( 0 );
        if ( s.size() == 0 )
            fail( "E-EVAL-003", std::string{ e.op == Op::min ? "min" : "max" } + " of the empty set", e );
        return e.op == Op::min ? s.items().front() : s.items().back();
    }
    case Op::apply:
        return apply( arg( 0 ), arg( 1 ), e );
    case Op::forall:
    case Op::exists:
        return Value::boolean( quantify( e, env, 0 ) );
    }
    return Value{};
}

} // namespace vdd::specml
