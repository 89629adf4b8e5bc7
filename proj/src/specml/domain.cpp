#include "vdd/specml/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vdd::specml
{

bool compatible( const Type& a, const Type& b )
{
    if ( a.kind == Type::Kind::any || b.kind == Type::Kind::any )
        return true;
    if ( a.kind != b.kind )
        return false;
    if ( a.kind == Type::Kind::element )
        return a.carrier == b.carrier;
    for ( std::size_t i = 0; i < a.parts.size(); ++i )
        if ( !compatible( a.parts[ i ], b.parts[ i ] ) )
            return false;
    return true;
}

Type unify( const Type& a, const Type& b )
{
    if ( a.kind == Type::Kind::any )
        return b;
    if ( b.kind == Type::Kind::any )
        return a;
    Type out = a;
    for ( std::size_t i = 0; i < out.parts.size(); ++i )
        out.parts[ i ] = unify( a.parts[ i ], b.parts[ i ] );
    return out;
}

std::string to_string( const Type& t, const Universe& universe )
{
    switch ( t.kind )
    {
    case Type::Kind::boolean:
        return "BOOL";
    case Type::Kind::integer:
        return "INT";
    case Type::Kind::any:
        return "?";
    case Type::Kind::element:
        return t.carrier < universe.carriers.size() ? universe.carriers[ t.carrier ].name
                                                     : "carrier#" + std::to_string( t.carrier );
    case Type::Kind::set:
        return "POW(" + to_string( t.parts[ 0 ], universe ) + ")";
    case Type::Kind::pair:
        return "(" + to_string( t.parts[ 0 ], universe ) + " * " + to_string( t.parts[ 1 ], universe ) + ")";
    }
    return "?";
}

Type Domain::type() const
{
    switch ( kind )
    {
    case Kind::boolean:
        return Type::boolean();
    case Kind::range:
        return Type::integer();
    case Kind::carrier:
        return Type::element( carrier );
    case Kind::powerset:
        return Type::set_of( parts[ 0 ].type() );
    case Kind::partial_function:
    case Kind::total_function:
        return Type::set_of( Type::pair( parts[ 0 ].type(), parts[ 1 ].type() ) );
    }
    return Type::any();
}

bool Domain::contains( const Value& v ) const
{
    switch ( kind )
    {
    case Kind::boolean:
        return v.kind() == Value::Kind::boolean;
    case Kind::range:
        return v.kind() == Value::Kind::integer && v.as_int() >= lo && v.as_int() <= hi;
    case Kind::carrier:
        return v.kind() == Value::Kind::element && v.carrier() == carrier && v.index() < carrier_size;
    case Kind::powerset:
        if ( v.kind() != Value::Kind::set )
            return false;
        return std::all_of( v.items().begin(), v.items().end(),
                            [ & ]( const Value& x ) { return parts[ 0 ].contains( x ); } );
    case Kind::partial_function:
    case Kind::total_function:
    {
        if ( v.kind() != Value::Kind::set )
            return false;
        const Value* previous = nullptr;
        for ( const auto& p : v.items() )
        {
            if ( p.kind() != Value::Kind::pair || !parts[ 0 ].contains( p.first() )
                 || !parts[ 1 ].contains( p.second() ) )
                return false;
            // Pairs are sorted, so a repeated first component is adjacent.
            if ( previous && previous->first() == p.first() )
                return false;
            previous = &p;
        }
        if ( kind == Kind::total_function )
            return static_cast< double >( v.size() ) == parts[ 0 ].cardinality();
        return true;
    }
    }
    return false;
}

double Domain::cardinality() const
{
    constexpr double inf = std::numeric_limits< double >::infinity();
    switch ( kind )
    {
    case Kind::boolean:
        return 2;
    case Kind::range:
        return hi < lo ? 0 : static_cast< double >( hi - lo ) + 1;
    case Kind::carrier:
        return carrier_size;
    case Kind::powerset:
    {
        double n = parts[ 0 ].cardinality();
        return n > 1000 ? inf : std::pow( 2.0, n );
    }
    case Kind::partial_function:
    case Kind::total_function:
    {
        double d = parts[ 0 ].cardinality();
        double r = parts[ 1 ].cardinality() + ( kind == Kind::partial_function ? 1 : 0 );
        if ( d > 1e6 || r > 1e300 )
            return inf;
        return std::pow( r, d );
    }
    }
    return inf;
}

namespace
{

void functions( const std::vector< Value >& dom, const std::vector< Value >& ran, bool total, std::size_t at,
                std::vector< Value >& current, std::vector< Value >& out )
{
    if ( at == dom.size() )
    {
        out.push_back( Value::sorted_set( current ) );
        return;
    }
    if ( !total )
        functions( dom, ran, total, at + 1, current, out );
    for ( const auto& r : ran )
    {
        current.push_back( Value::pair( dom[ at ], r ) );
        functions( dom, ran, total, at + 1, current, out );
        current.pop_back();
    }
}

} // namespace

std::vector< Value > Domain::enumerate() const
{
    std::vector< Value > out;
    switch ( kind )
    {
    case Kind::boolean:
        out = { Value::boolean( false ), Value::boolean( true ) };
        break;
    case Kind::range:
        for ( std::int64_t i = lo; i <= hi; ++i )
            out.push_back( Value::integer( i ) );
        break;
    case Kind::carrier:
        for ( std::uint32_t i = 0; i < carrier_size; ++i )
            out.push_back( Value::element( carrier, i ) );
        break;
    case Kind::powerset:
    {
        auto base = parts[ 0 ].enumerate();
        std::size_t n = base.size();
        for ( std::uint64_t mask = 0; mask < ( std::uint64_t{ 1 } << n ); ++mask )
        {
            std::vector< Value > items;
            for ( std::size_t i = 0; i < n; ++i )
                if ( mask & ( std::uint64_t{ 1 } << i ) )
                    items.push_back( base[ i ] );
            out.push_back( Value::sorted_set( std::move( items ) ) );
        }
        std::sort( out.begin(), out.end() );
        break;
    }
    case Kind::partial_function:
    case Kind::total_function:
    {
        auto dom = parts[ 0 ].enumerate();
        auto ran = parts[ 1 ].enumerate();
        std::vector< Value > current;
        functions( dom, ran, kind == Kind::total_function, 0, current, out );
        std::sort( out.begin(), out.end() );
        break;
    }
    }
    return out;
}

std::string to_string( const Domain& d, const Universe& universe )
{
    switch ( d.kind )
    {
    case Domain::Kind::boolean:
        return "BOOL";
    case Domain::Kind::range:
        return std::to_string( d.lo ) + ".." + std::to_string( d.hi );
    case Domain::Kind::carrier:
        return d.carrier < universe.carriers.size() ? universe.carriers[ d.carrier ].name : "?";
    case Domain::Kind::powerset:
        return "POW(" + to_string( d.parts[ 0 ], universe ) + ")";
    case Domain::Kind::partial_function:
        return to_string( d.parts[ 0 ], universe ) + " +-> " + to_string( d.parts[ 1 ], universe );
    case Domain::Kind::total_function:
        return to_string( d.parts[ 0 ], universe ) + " --> " + to_string( d.parts[ 1 ], universe );
    }
    return "?";
}

} // namespace vdd::specml
