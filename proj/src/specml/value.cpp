#include "vdd/specml/value.hpp"

#include <algorithm>

namespace vdd::specml
{

namespace
{

const std::vector< Value > no_items;

std::size_t mix( std::size_t seed, std::size_t v )
{
    return seed ^ ( v + 0x9e3779b97f4a7c15ULL + ( seed << 6 ) + ( seed >> 2 ) );
}

} // namespace

Value Value::boolean( bool b )
{
    Value v;
    v._kind = Kind::boolean;
    v._number = b ? 1 : 0;
    return v;
}

Value Value::integer( std::int64_t n )
{
    Value v;
    v._kind = Kind::integer;
    v._number = n;
    return v;
}

Value Value::element( std::uint32_t carrier, std::uint32_t index )
{
    Value v;
    v._kind = Kind::element;
    v._number = ( static_cast< std::int64_t >( carrier ) << 32 ) | index;
    return v;
}

Value Value::set( std::vector< Value > items )
{
    std::sort( items.begin(), items.end() );
    items.erase( std::unique( items.begin(), items.end() ), items.end() );
    return sorted_set( std::move( items ) );
}

Value Value::sorted_set( std::vector< Value > items )
{
    Value v;
    v._kind = Kind::set;
    v._number = static_cast< std::int64_t >( items.size() );
    v._items = std::make_shared< const std::vector< Value > >( std::move( items ) );
    return v;
}

Value Value::pair( Value first, Value second )
{
    Value v;
    v._kind = Kind::pair;
    v._items = std::make_shared< const std::vector< Value > >( std::vector< Value >{ std::move( first ),
                                                                                    std::move( second ) } );
    return v;
}

std::span< const Value > Value::items() const
{
    return _items ? std::span< const Value >{ *_items } : std::span< const Value >{ no_items };
}

bool Value::contains( const Value& v ) const
{
    auto all = items();
    return std::binary_search( all.begin(), all.end(), v );
}

std::size_t Value::hash() const
{
    std::size_t h = mix( static_cast< std::size_t >( _kind ), static_cast< std::size_t >( _number ) );
    for ( const auto& item : items() )
        h = mix( h, item.hash() );
    return h;
}

std::strong_ordering operator<=>( const Value& a, const Value& b )
{
    if ( a._kind != b._kind )
        return a._kind <=> b._kind;
    switch ( a._kind )
    {
    case Value::Kind::boolean:
    case Value::Kind::integer:
    case Value::Kind::element:
        return a._number <=> b._number;
    case Value::Kind::set:
    case Value::Kind::pair:
        break;
    }
    if ( a._items == b._items )
        return std::strong_ordering::equal;
    auto x = a.items();
    auto y = b.items();
    return std::lexicographical_compare_three_way( x.begin(), x.end(), y.begin(), y.end() );
}

std::size_t StateHash::operator()( const State& s ) const
{
    std::size_t h = s.size();
    for ( const auto& v : s )
        h = mix( h, v.hash() );
    return h;
}

std::string to_string( const Value& value, const Universe& universe )
{
    switch ( value.kind() )
    {
    case Value::Kind::boolean:
        return value.as_bool() ? "TRUE" : "FALSE";
    case Value::Kind::integer:
        return std::to_string( value.as_int() );
    case Value::Kind::element:
    {
        if ( value.carrier() < universe.carriers.size() )
        {
            const auto& c = universe.carriers[ value.carrier() ];
            if ( value.index() < c.elements.size() )
                return c.elements[ value.index() ];
        }
        return "<" + std::to_string( value.carrier() ) + ":" + std::to_string( value.index() ) + ">";
    }
    case Value::Kind::pair:
    {
        std::string left = to_string( value.first(), universe );
        if ( value.first().kind() == Value::Kind::pair )
            left = "(" + left + ")";
        std::string right = to_string( value.second(), universe );
        if ( value.second().kind() == Value::Kind::pair )
            right = "(" + right + ")";
        return left + " |-> " + right;
    }
    case Value::Kind::set:
    {
        std::string out = "{";
        bool first = true;
        for ( const auto& item : value.items() )
        {
            if ( !first )
                out += ", ";
            first = false;
            out += to_string( item, universe );
        }
        return out + "}";
    }
    }
    return "?";
}

} // namespace vdd::specml
