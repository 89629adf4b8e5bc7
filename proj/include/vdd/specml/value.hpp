#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace vdd::specml
{

// Names of the enumerated carrier sets a machine can see. Element values
// refer to a carrier by index, so printing needs the universe.
struct Carrier
{
    std::string name;
    std::vector< std::string > elements;
};

struct Universe
{
    std::vector< Carrier > carriers;
};

// Immutable runtime value. Sets are kept sorted and duplicate-free so that
// structural equality is plain element-wise comparison; relations and
// functions are sets of pairs.
class Value
{
public:
    enum class Kind : std::uint8_t
    {
        boolean,
        integer,
        element,
        set,
        pair,
    };

    Value() = default;

    static Value boolean( bool b );
    static Value integer( std::int64_t v );
    static Value element( std::uint32_t carrier, std::uint32_t index );
    static Value set( std::vector< Value > items );
    static Value sorted_set( std::vector< Value > items ); // caller guarantees sorted, unique
    static Value pair( Value first, Value second );

    [[nodiscard]] Kind kind() const { return _kind; }
    [[nodiscard]] bool as_bool() const { return _number != 0; }
    [[nodiscard]] std::int64_t as_int() const { return _number; }
    [[nodiscard]] std::uint32_t carrier() const { return static_cast< std::uint32_t >( _number >> 32 ); }
    [[nodiscard]] std::uint32_t index() const { return static_cast< std::uint32_t >( _number & 0xffffffff ); }

    [[nodiscard]] std::span< const Value > items() const;
    [[nodiscard]] std::size_t size() const { return items().size(); }
    [[nodiscard]] const Value& first() const { return ( *_items )[ 0 ]; }
    [[nodiscard]] const Value& second() const { return ( *_items )[ 1 ]; }

    [[nodiscard]] bool contains( const Value& v ) const;
    [[nodiscard]] std::size_t hash() const;

    friend std::strong_ordering operator<=>( const Value& a, const Value& b );
    friend bool operator==( const Value& a, const Value& b ) { return ( a <=> b ) == 0; }

private:
    Kind _kind = Kind::boolean;
    std::int64_t _number = 0;
    std::shared_ptr< const std::vector< Value > > _items;
};

using State = std::vector< Value >;

struct StateHash
{
    std::size_t operator()( const State& s ) const;
};

std::string to_string( const Value& value, const Universe& universe );

} // namespace vdd::specml
