#include "vdd/specml/explore.hpp"

#include <json.hpp>

#include <deque>
#include <exception>

#include <omp.h>

namespace vdd::specml
{

bool enabled( const CompiledMachine& m, const CompiledEvent& ev, std::size_t binding, const State& s )
{
    std::vector< Value > locals( m.locals );
    const auto& values = ev.bindings[ binding ];
    std::copy( values.begin(), values.end(), locals.begin() );
    Env env{ &s, nullptr, &locals };
    try
    {
        for ( const auto& g : ev.guards )
            if ( !holds( g, env ) )
                return false;
    }
    catch ( const EvalError& )
    {
        // A guard that cannot be evaluated filters the binding out.
        return false;
    }
    return true;
}

State apply( const CompiledMachine& m, const CompiledEvent& ev, std::size_t binding, const State& s )
{
    std::vector< Value > locals( m.locals );
    const auto& values = ev.bindings[ binding ];
    std::copy( values.begin(), values.end(), locals.begin() );
    Env env{ &s, nullptr, &locals };
    State next = s;
    if ( next.size() < m.variables.size() )
        next.resize( m.variables.size() );
    for ( const auto& a : ev.actions )
    {
        auto slot = static_cast< std::size_t >( a.slot );
        Value v = evaluate( a.value, env );
        if ( a.index )
            v = Value::set( [ & ] {
                Value key = evaluate( *a.index, env );
                std::vector< Value > items;
                for ( const auto& p : s[ slot ].items() )
                    if ( !( p.first() == key ) )
                        items.push_back( p );
                items.push_back( Value::pair( key, v ) );
                return items;
            }() );
        if ( !m.domains[ slot ].contains( v ) )
            throw EvalError( "E-EVAL-002",
                             ev.name + " assigns " + to_string( v, m.universe ) + " to '" + m.variables[ slot ]
                                 + "', outside " + to_string( m.domains[ slot ], m.universe ),
                             a.span );
        next[ slot ] = std::move( v );
    }
    return next;
}

std::vector< Step > successors( const CompiledMachine& m, const State& s )
{
    std::vector< Step > out;
    for ( std::uint32_t e = 0; e < m.events.size(); ++e )
    {
        const auto& ev = m.events[ e ];
        for ( std::uint32_t b = 0; b < ev.bindings.size(); ++b )
            if ( enabled( m, ev, b, s ) )
                out.push_back( Step{ e, b, apply( m, ev, b, s ) } );
    }
    return out;
}

std::vector< Step > initial_steps( const CompiledMachine& m )
{
    std::vector< Step > out;
    State blank( m.variables.size() );
    const auto& ev = m.initialisation;
    for ( std::uint32_t b = 0; b < ev.bindings.size(); ++b )
        if ( enabled( m, ev, b, blank ) )
            out.push_back( Step{ 0, b, apply( m, ev, b, blank ) } );
    return out;
}

std::span< const Transition > StateSpace::out( std::uint32_t state ) const
{
    return std::span< const Transition >{ transitions }.subspan( out_begin[ state ],
                                                                 out_begin[ state + 1 ] - out_begin[ state ] );
}

std::optional< std::uint32_t > StateSpace::find( const State& s ) const
{
    auto it = index.find( s );
    if ( it == index.end() )
        return std::nullopt;
    return it->second;
}

bool StateSpace::is_initial( std::uint32_t state ) const
{
    return !parent[ state ].has_value() && state < states.size();
}

std::vector< std::uint32_t > StateSpace::trace_to( std::uint32_t state ) const
{
    std::vector< std::uint32_t > out;
    while ( parent[ state ] )
    {
        out.push_back( *parent[ state ] );
        state = transitions[ *parent[ state ] ].source;
    }
    std::reverse( out.begin(), out.end() );
    return out;
}

namespace
{

// Shared bookkeeping of both exploration strategies; the merge order is what
// makes them produce identical spaces.
class Builder
{
    StateSpace& _space;

public:
    explicit Builder( StateSpace& space ) : _space{ space } {}

    std::optional< std::uint32_t > intern( State s, std::optional< std::uint32_t > parent )
    {
        if ( auto found = _space.find( s ) )
            return found;
        if ( _space.states.size() >= _space.cap )
        {
            _space.truncated = true;
            return std::nullopt;
        }
        auto id = static_cast< std::uint32_t >( _space.states.size() );
        _space.index.emplace( s, id );
        _space.states.push_back( std::move( s ) );
        _space.parent.push_back( parent );
        return id;
    }

    void seed( const CompiledMachine& m )
    {
        for ( auto& step : initial_steps( m ) )
            if ( auto id = intern( std::move( step.target ), std::nullopt ) )
                if ( std::find( _space.initial.begin(), _space.initial.end(), *id ) == _space.initial.end() )
                    _space.initial.push_back( *id );
    }

    void expand( std::uint32_t source, std::vector< Step >& steps )
    {
        _space.out_begin.push_back( static_cast< std::uint32_t >( _space.transitions.size() ) );
        for ( auto& step : steps )
        {
            auto tid = static_cast< std::uint32_t >( _space.transitions.size() );
            if ( auto target = intern( std::move( step.target ), tid ) )
                _space.transitions.push_back( Transition{ source, step.event, step.binding, *target } );
        }
    }

    void finish() { _space.out_begin.push_back( static_cast< std::uint32_t >( _space.transitions.size() ) ); }
};

void check_cap( std::size_t cap )
{
    if ( cap < 1 )
        throw Error( "E-EXP-001", "exploration cap must be at least 1" );
}

} // namespace

StateSpace explore_serial( const CompiledMachine& m, std::size_t cap )
{
    check_cap( cap );
    StateSpace space;
    space.cap = cap;
    Builder builder{ space };
    builder.seed( m );
    for ( std::uint32_t i = 0; i < space.states.size(); ++i )
    {
        auto steps = successors( m, space.states[ i ] );
        builder.expand( i, steps );
    }
    builder.finish();
    return space;
}

StateSpace explore( const CompiledMachine& m, std::size_t cap )
{
    check_cap( cap );
    StateSpace space;
    space.cap = cap;
    Builder builder{ space };
    builder.seed( m );

    std::size_t lo = 0;
    while ( lo < space.states.size() )
    {
        std::size_t hi = space.states.size();
        auto width = static_cast< std::int64_t >( hi - lo );
        std::vector< std::vector< Step > > level( hi - lo );
        std::vector< std::exception_ptr > errors( hi - lo );

#pragma omp parallel for schedule( dynamic, 8 ) if ( width > 32 )
        for ( std::int64_t k = 0; k < width; ++k )
        {
            try
            {
                level[ k ] = successors( m, space.states[ lo + static_cast< std::size_t >( k ) ] );
            }
            catch ( ... )
            {
                errors[ k ] = std::current_exception();
            }
        }

        for ( std::size_t k = 0; k < level.size(); ++k )
        {
            if ( errors[ k ] )
                std::rethrow_exception( errors[ k ] );
            builder.expand( static_cast< std::uint32_t >( lo + k ), level[ k ] );
        }
        lo = hi;
    }
    builder.finish();
    return space;
}

namespace
{

std::vector< Violation > violations_at( const StateSpace& space, const CompiledMachine& m, std::uint32_t s,
                                        std::vector< Value >& locals )
{
    std::vector< Violation > out;
    Env env{ &space.states[ s ], nullptr, &locals };
    for ( const auto& inv : m.invariants )
    {
        std::string error;
        bool ok = false;
        try
        {
            ok = holds( inv.predicate, env );
        }
        catch ( const EvalError& e )
        {
            error = e.what();
        }
        if ( !ok )
            out.push_back( Violation{ s, inv.label, space.trace_to( s ), error } );
    }
    return out;
}

} // namespace

std::vector< Violation > check_invariants_serial( const StateSpace& space, const CompiledMachine& m )
{
    std::vector< Violation > out;
    std::vector< Value > locals( m.locals );
    for ( std::uint32_t s = 0; s < space.states.size(); ++s )
    {
        auto found = violations_at( space, m, s, locals );
        out.insert( out.end(), found.begin(), found.end() );
    }
    return out;
}

std::vector< Violation > check_invariants( const StateSpace& space, const CompiledMachine& m )
{
    auto n = static_cast< std::int64_t >( space.states.size() );
    std::vector< std::vector< Violation > > per_state( space.states.size() );

#pragma omp parallel if ( n > 256 )
    {
        std::vector< Value > locals( m.locals );
#pragma omp for schedule( static )
        for ( std::int64_t s = 0; s < n; ++s )
            per_state[ s ] = violations_at( space, m, static_cast< std::uint32_t >( s ), locals );
    }

    std::vector< Violation > out;
    for ( auto& v : per_state )
        out.insert( out.end(), std::make_move_iterator( v.begin() ), std::make_move_iterator( v.end() ) );
    return out;
}

void export_space( std::ostream& out, const StateSpace& space, const CompiledMachine& m )
{
    using nlohmann::ordered_json;
    for ( std::uint32_t s = 0; s < space.states.size(); ++s )
    {
        ordered_json values = ordered_json::object();
        for ( std::size_t v = 0; v < m.variables.size(); ++v )
            values[ m.variables[ v ] ] = to_string( space.states[ s ][ v ], m.universe );
        ordered_json line = { { "kind", "state" },
                              { "id", s },
                              { "initial", space.is_initial( s ) },
                              { "values", values } };
        out << line.dump() << '\n';
    }
    for ( const auto& t : space.transitions )
    {
        const auto& ev = m.events[ t.event ];
        ordered_json binding = ordered_json::object();
        for ( std::size_t p = 0; p < ev.parameters.size(); ++p )
            binding[ ev.parameters[ p ] ] = to_string( ev.bindings[ t.binding ][ p ], m.universe );
        ordered_json line = { { "kind", "transition" },
                              { "source", t.source },
                              { "event", ev.name },
                              { "binding", binding },
                              { "target", t.target } };
        out << line.dump() << '\n';
    }
    ordered_json summary = { { "kind", "summary" },
                             { "states", space.states.size() },
                             { "transitions", space.transitions.size() },
                             { "truncated", space.truncated } };
    out << summary.dump() << '\n';
}

std::optional< State > replay( const CompiledMachine& m, const StateSpace& space, std::uint32_t start,
                               std::span< const std::uint32_t > trace )
{
    if ( start >= space.states.size() )
        return std::nullopt;
    State current = space.states[ start ];
    bool reproduced = false;
    for ( const auto& step : initial_steps( m ) )
        reproduced = reproduced || step.target == current;
    if ( !reproduced )
        return std::nullopt;
    for ( auto tid : trace )
    {
        if ( tid >= space.transitions.size() )
            return std::nullopt;
        const auto& t = space.transitions[ tid ];
        if ( !( space.states[ t.source ] == current ) )
            return std::nullopt;
        const auto& ev = m.events[ t.event ];
        if ( !enabled( m, ev, t.binding, current ) )
            return std::nullopt;
        State next = apply( m, ev, t.binding, current );
        if ( !( next == space.states[ t.target ] ) )
            return std::nullopt;
        current = std::move( next );
    }
    return current;
}

} // namespace vdd::specml
