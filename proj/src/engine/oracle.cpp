// Brute-force LTL checker used to cross-check the tableau construction. It
// shares only atom evaluation with it: no automaton, no normal form.

#include "atoms.hpp"

#include <algorithm>
#include <unordered_map>

namespace vdd::engine
{

namespace
{

using detail::Label;
using volang::Ltl;
using volang::LtlOp;

// A node of the run graph: a state plus the move taken from it.
struct Move
{
    std::uint32_t state;
    std::uint32_t move;
};

struct RunGraph
{
    std::vector< Move > nodes;
    std::vector< Label > label;
    std::vector< std::vector< std::uint32_t > > succ;
    std::vector< std::uint32_t > initial;
};

RunGraph run_graph( const specml::StateSpace& space, const detail::Atoms& atoms )
{
    RunGraph g;
    std::vector< std::vector< std::uint32_t > > from( space.size() );
    for ( std::uint32_t s = 0; s < space.size(); ++s )
        for ( auto mv : detail::moves( space, s ) )
        {
            from[ s ].push_back( static_cast< std::uint32_t >( g.nodes.size() ) );
            g.nodes.push_back( { s, mv } );
            g.label.push_back( atoms.label( space.states[ s ], space.states[ detail::target( space, s, mv ) ] ) );
        }
    g.succ.resize( g.nodes.size() );
    for ( std::size_t i = 0; i < g.nodes.size(); ++i )
        g.succ[ i ] = from[ detail::target( space, g.nodes[ i ].state, g.nodes[ i ].move ) ];
    for ( auto s : space.initial )
        for ( auto n : from[ s ] )
            g.initial.push_back( n );
    std::ranges::sort( g.initial );
    g.initial.erase( std::unique( g.initial.begin(), g.initial.end() ), g.initial.end() );
    return g;
}

// Phase one: every path of at most max_len nodes from an initial node,
// closed into a lasso at each position it can loop back to.
bool violating_lasso( const Ltl& f, const detail::Atoms& atoms, const RunGraph& g, std::size_t max_len )
{
    std::vector< std::uint32_t > path;
    std::vector< Label > labels;
    auto dfs = [&]( auto&& self, std::uint32_t v ) -> bool {
        path.push_back( v );
        labels.push_back( g.label[ v ] );
        for ( auto w : g.succ[ v ] )
            for ( std::size_t j = 0; j < path.size(); ++j )
                if ( path[ j ] == w && !detail::holds_on_word( f, atoms, labels, j ) )
                    return true;
        if ( path.size() < max_len )
            for ( auto w : g.succ[ v ] )
                if ( self( self, w ) )
                    return true;
        path.pop_back();
        labels.pop_back();
        return false;
    };
    for ( auto v : g.initial )
    {
        path.clear();
        labels.clear();
        if ( dfs( dfs, v ) )
            return true;
    }
    return false;
}

// Phase two. A type fixes the truth of every temporal subformula at a
// position; the rest follows from the label. Pairs (node, type) linked by the
// one-step unfolding rules form a graph whose fair cycles reachable from a
// pair falsifying the root are exactly the violating runs.
class Hintikka
{
    const Ltl& _root;
    const detail::Atoms& _atoms;
    std::vector< const Ltl* > _subs; // post-order
    std::vector< int > _temporal;    // bit index per subformula, -1 if derived
    std::vector< const Ltl* > _temporals;
    std::unordered_map< const Ltl*, std::size_t > _pos;

    void collect( const Ltl& f )
    {
        for ( const auto& a : f.args )
            collect( a );
        _pos[ &f ] = _subs.size();
        _subs.push_back( &f );
    }

public:
    Hintikka( const Ltl& root, const detail::Atoms& atoms )
        : _root( root )
        , _atoms( atoms )
    {
        collect( root );
        for ( const Ltl* s : _subs )
        {
            bool t = s->op == LtlOp::next || s->op == LtlOp::globally || s->op == LtlOp::finally
                  || s->op == LtlOp::until;
            _temporal.push_back( t ? static_cast< int >( _temporals.size() ) : -1 );
            if ( t )
                _temporals.push_back( s );
        }
    }

    [[nodiscard]] std::size_t width() const { return _temporals.size(); }

    // Truth of every subformula; nullopt when the type is locally
    // inconsistent.
    std::optional< std::vector< bool > > values( Label label, std::uint64_t type ) const
    {
        std::vector< bool > v( _subs.size() );
        for ( std::size_t i = 0; i < _subs.size(); ++i )
        {
            const Ltl& f = *_subs[ i ];
            auto arg = [&]( std::size_t k ) { return v[ _pos.at( &f.args[ k ] ) ]; };
            if ( _temporal[ i ] >= 0 )
            {
                bool t = ( type >> _temporal[ i ] ) & 1;
                if ( f.op == LtlOp::globally && t && !arg( 0 ) )
                    return std::nullopt;
                if ( f.op == LtlOp::finally && !t && arg( 0 ) )
                    return std::nullopt;
                if ( f.op == LtlOp::until && ( ( t && !arg( 0 ) && !arg( 1 ) ) || ( !t && arg( 1 ) ) ) )
                    return std::nullopt;
                v[ i ] = t;
                continue;
            }
            switch ( f.op )
            {
            case LtlOp::state:
            case LtlOp::ba:
                v[ i ] = ( label >> _atoms.index.at( &f ) ) & 1;
                break;
            case LtlOp::truth:
                v[ i ] = true;
                break;
            case LtlOp::falsity:
                v[ i ] = false;
                break;
            case LtlOp::not_:
                v[ i ] = !arg( 0 );
                break;
            case LtlOp::and_:
                v[ i ] = arg( 0 ) && arg( 1 );
                break;
            case LtlOp::or_:
                v[ i ] = arg( 0 ) || arg( 1 );
                break;
            case LtlOp::implies:
                v[ i ] = !arg( 0 ) || arg( 1 );
                break;
            default:
                break;
            }
        }
        return v;
    }

    [[nodiscard]] bool root( const std::vector< bool >& v ) const { return v[ _pos.at( &_root ) ]; }

    // What the next position must look like: per temporal subformula the
    // value of its successor obligation (operand for X, itself otherwise).
    struct Demand
    {
        std::uint64_t care = 0;
        std::uint64_t want = 0;
    };

    [[nodiscard]] Demand demand( const std::vector< bool >& v ) const
    {
        Demand d;
        for ( std::size_t k = 0; k < _temporals.size(); ++k )
        {
            const Ltl& f = *_temporals[ k ];
            bool self = v[ _pos.at( &f ) ];
            bool a = v[ _pos.at( &f.args[ 0 ] ) ];
            auto set = [&]( bool value ) {
                d.care |= std::uint64_t{ 1 } << k;
                if ( value )
                    d.want |= std::uint64_t{ 1 } << k;
            };
            switch ( f.op )
            {
            case LtlOp::next:
                set( self );
                break;
            case LtlOp::globally:
                if ( self )
                    set( true );
                else if ( a )
                    set( false );
                break;
            case LtlOp::finally:
                if ( !self )
                    set( false );
                else if ( !a )
                    set( true );
                break;
            case LtlOp::until:
            {
                bool b = v[ _pos.at( &f.args[ 1 ] ) ];
                if ( self && !b )
                    set( true );
                else if ( !self && a )
                    set( false );
                break;
            }
            default:
                break;
            }
        }
        return d;
    }

    // The successor obligations as seen from the next position.
    [[nodiscard]] std::uint64_t signature( const std::vector< bool >& v ) const
    {
        std::uint64_t s = 0;
        for ( std::size_t k = 0; k < _temporals.size(); ++k )
        {
            const Ltl& f = *_temporals[ k ];
            bool value = f.op == LtlOp::next ? v[ _pos.at( &f.args[ 0 ] ) ] : v[ _pos.at( &f ) ];
            if ( value )
                s |= std::uint64_t{ 1 } << k;
        }
        return s;
    }

    // Eventualities a fair cycle must discharge: per F/U subformula, a
    // position where it is false or its goal holds; per G subformula, one
    // where it holds or its operand fails.
    [[nodiscard]] std::uint64_t fulfilled( const std::vector< bool >& v ) const
    {
        std::uint64_t out = 0;
        for ( std::size_t k = 0; k < _temporals.size(); ++k )
        {
            const Ltl& f = *_temporals[ k ];
            if ( f.op == LtlOp::globally )
            {
                if ( v[ _pos.at( &f ) ] || !v[ _pos.at( &f.args[ 0 ] ) ] )
                    out |= std::uint64_t{ 1 } << k;
                continue;
            }
            if ( f.op != LtlOp::finally && f.op != LtlOp::until )
                continue;
            const Ltl& goal = f.op == LtlOp::finally ? f.args[ 0 ] : f.args[ 1 ];
            if ( !v[ _pos.at( &f ) ] || v[ _pos.at( &goal ) ] )
                out |= std::uint64_t{ 1 } << k;
        }
        return out;
    }

    [[nodiscard]] std::uint64_t eventualities() const
    {
        std::uint64_t out = 0;
        for ( std::size_t k = 0; k < _temporals.size(); ++k )
            if ( _temporals[ k ]->op != LtlOp::next )
                out |= std::uint64_t{ 1 } << k;
        return out;
    }
};

bool violating_run( const Ltl& f, const detail::Atoms& atoms, const RunGraph& g, std::size_t budget )
{
    Hintikka h{ f, atoms };
    if ( h.width() > 20 )
        throw Error( "E-ENG-030", "oracle: too many temporal subformulas for exhaustive search", f.span );
    const std::uint64_t types = std::uint64_t{ 1 } << h.width();
    if ( types * g.nodes.size() > budget * 64 )
        throw Error( "E-ENG-030", "oracle: search space exceeds the budget", f.span );

    struct Pair
    {
        std::uint32_t node;
        std::uint64_t signature;
        Hintikka::Demand demand;
        std::uint64_t fulfilled;
        bool root;
    };
    // Consistent types per run-graph node.
    std::vector< std::vector< Pair > > per_node( g.nodes.size() );
    std::size_t total = 0;
    for ( std::uint32_t n = 0; n < g.nodes.size(); ++n )
        for ( std::uint64_t t = 0; t < types; ++t )
            if ( auto v = h.values( g.label[ n ], t ) )
            {
                per_node[ n ].push_back( { n, h.signature( *v ), h.demand( *v ), h.fulfilled( *v ), h.root( *v ) } );
                if ( ++total > budget )
                    throw Error( "E-ENG-030", "oracle: search space exceeds the budget", f.span );
            }

    // Reachable pairs from initial pairs falsifying the root.
    std::vector< std::pair< std::uint32_t, std::uint32_t > > ids; // (node, index in per_node)
    std::unordered_map< std::uint64_t, std::uint32_t > index;
    std::vector< std::vector< std::uint32_t > > succ;
    auto visit = [&]( std::uint32_t n, std::uint32_t k ) {
        std::uint64_t key = ( std::uint64_t{ n } << 32 ) | k;
        auto [ it, fresh ] = index.emplace( key, static_cast< std::uint32_t >( ids.size() ) );
        if ( fresh )
        {
            ids.emplace_back( n, k );
            succ.emplace_back();
        }
        return it->second;
    };
    for ( auto n : g.initial )
        for ( std::uint32_t k = 0; k < per_node[ n ].size(); ++k )
            if ( !per_node[ n ][ k ].root )
                visit( n, k );
    for ( std::size_t i = 0; i < ids.size(); ++i )
    {
        auto [ n, k ] = ids[ i ];
        const Pair& p = per_node[ n ][ k ];
        std::vector< std::uint32_t > out;
        for ( auto n2 : g.succ[ n ] )
            for ( std::uint32_t k2 = 0; k2 < per_node[ n2 ].size(); ++k2 )
                if ( ( per_node[ n2 ][ k2 ].signature & p.demand.care ) == p.demand.want )
                    out.push_back( visit( n2, k2 ) );
        succ[ i ] = std::move( out );
    }

    // Strongly connected components by two passes (Kosaraju), then a fair
    // nontrivial component decides.
    const std::size_t count = ids.size();
    std::vector< std::vector< std::uint32_t > > pred( count );
    for ( std::uint32_t v = 0; v < count; ++v )
        for ( auto w : succ[ v ] )
            pred[ w ].push_back( v );
    std::vector< std::uint32_t > order;
    std::vector< bool > seen( count, false );
    for ( std::uint32_t r = 0; r < count; ++r )
    {
        if ( seen[ r ] )
            continue;
        std::vector< std::pair< std::uint32_t, std::size_t > > stack{ { r, 0 } };
        seen[ r ] = true;
        while ( !stack.empty() )
        {
            auto& [ v, i ] = stack.back();
            if ( i < succ[ v ].size() )
            {
                auto w = succ[ v ][ i++ ];
                if ( !seen[ w ] )
                {
                    seen[ w ] = true;
                    stack.emplace_back( w, 0 );
                }
                continue;
            }
            order.push_back( v );
            stack.pop_back();
        }
    }
    constexpr std::uint32_t none = std::numeric_limits< std::uint32_t >::max();
    std::vector< std::uint32_t > comp( count, none );
    std::uint32_t components = 0;
    const std::uint64_t needed = h.eventualities();
    for ( auto it = order.rbegin(); it != order.rend(); ++it )
    {
        if ( comp[ *it ] != none )
            continue;
        std::vector< std::uint32_t > members{ *it };
        comp[ *it ] = components;
        for ( std::size_t i = 0; i < members.size(); ++i )
            for ( auto w : pred[ members[ i ] ] )
                if ( comp[ w ] == none )
                {
                    comp[ w ] = components;
                    members.push_back( w );
                }
        bool cyclic = members.size() > 1;
        std::uint64_t got = 0;
        for ( auto v : members )
        {
            for ( auto w : succ[ v ] )
                cyclic = cyclic || w == v;
            auto [ n, k ] = ids[ v ];
            got |= per_node[ n ][ k ].fulfilled;
        }
        if ( cyclic && ( got & needed ) == needed )
            return true;
        ++components;
    }
    return false;
}

} // namespace

Verdict oracle_ltl( const volang::Ltl& formula, const specml::CompiledMachine& m, const specml::StateSpace& space,
                    std::size_t max_len, std::size_t budget )
{
    if ( space.truncated )
        throw Error( "E-ENG-031", "oracle needs a complete state space", formula.span );
    detail::Atoms atoms{ formula, m };
    RunGraph g = run_graph( space, atoms );
    if ( violating_lasso( formula, atoms, g, max_len ) )
        return Verdict::fail;
    return violating_run( formula, atoms, g, budget ) ? Verdict::fail : Verdict::pass;
}

bool holds_on_lasso( const volang::Ltl& formula, const specml::CompiledMachine& m,
                     std::span< const specml::State > states, std::size_t loop )
{
    detail::Atoms atoms{ formula, m };
    std::vector< Label > labels;
    for ( std::size_t i = 0; i < states.size(); ++i )
        labels.push_back( atoms.label( states[ i ], states[ i + 1 < states.size() ? i + 1 : loop ] ) );
    return detail::holds_on_word( formula, atoms, labels, loop );
}

} // namespace vdd::engine
