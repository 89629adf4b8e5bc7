// Tableau (GPVW) translation of the negated formula into a generalized
// Buchi automaton, product with the transition graph, accepting-SCC search.

#include "atoms.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <unordered_map>

namespace vdd::engine
{

namespace
{

using detail::Label;
using volang::Ltl;
using volang::LtlOp;

enum class N
{
    truth,
    falsity,
    pos, // atom
    neg, // negated atom
    and_,
    or_,
    next,
    until,
    release,
};

struct NNode
{
    N op;
    int a = -1;
    int b = -1;
    std::size_t atom = 0;

    friend auto operator<=>( const NNode&, const NNode& ) = default;
};

// Hash-consed negation normal form.
class Nnf
{
    std::map< NNode, int > _ids;

public:
    std::vector< NNode > nodes;

    int intern( NNode n )
    {
        auto [ it, fresh ] = _ids.emplace( n, static_cast< int >( nodes.size() ) );
        if ( fresh )
            nodes.push_back( n );
        return it->second;
    }

    int build( const Ltl& f, bool negated, const detail::Atoms& atoms )
    {
        switch ( f.op )
        {
        case LtlOp::state:
        case LtlOp::ba:
            return intern( { negated ? N::neg : N::pos, -1, -1, atoms.index.at( &f ) } );
        case LtlOp::truth:
            return intern( { negated ? N::falsity : N::truth } );
        case LtlOp::falsity:
            return intern( { negated ? N::truth : N::falsity } );
        case LtlOp::not_:
            return build( f.args[ 0 ], !negated, atoms );
        case LtlOp::and_:
        case LtlOp::or_:
        {
            int a = build( f.args[ 0 ], negated, atoms );
            int b = build( f.args[ 1 ], negated, atoms );
            bool conj = ( f.op == LtlOp::and_ ) != negated;
            return intern( { conj ? N::and_ : N::or_, a, b } );
        }
        case LtlOp::implies:
        {
            int a = build( f.args[ 0 ], !negated, atoms );
            int b = build( f.args[ 1 ], negated, atoms );
            return intern( { negated ? N::and_ : N::or_, a, b } );
        }
        case LtlOp::next:
            return intern( { N::next, build( f.args[ 0 ], negated, atoms ) } );
        case LtlOp::globally:
        {
            int body = build( f.args[ 0 ], negated, atoms );
            // G p = false R p;  not G p = true U not p
            return negated ? intern( { N::until, intern( { N::truth } ), body } )
                           : intern( { N::release, intern( { N::falsity } ), body } );
        }
        case LtlOp::finally:
        {
            int body = build( f.args[ 0 ], negated, atoms );
            return negated ? intern( { N::release, intern( { N::falsity } ), body } )
                           : intern( { N::until, intern( { N::truth } ), body } );
        }
        case LtlOp::until:
        {
            int a = build( f.args[ 0 ], negated, atoms );
            int b = build( f.args[ 1 ], negated, atoms );
            // not (a U b) = (not a) R (not b)
            return intern( { negated ? N::release : N::until, a, b } );
        }
        }
        return intern( { N::truth } );
    }
};

struct TNode
{
    std::set< int > incoming; // -1 is the initial pseudo-node
    std::set< int > fresh;
    std::set< int > old;
    std::set< int > next;
};

struct Automaton
{
    std::vector< std::set< int > > old;
    std::vector< std::vector< int > > succ;
    std::vector< int > initial;
    std::vector< Label > must_true;
    std::vector< Label > must_false;
    std::vector< std::vector< bool > > accepting; // per until-formula, per state
};

Automaton translate( Nnf& nnf, int root )
{
    std::vector< TNode > done;
    std::vector< TNode > work;
    work.push_back( TNode{ { -1 }, { root }, {}, {} } );
    int created = 0;
    std::vector< int > ids; // id of each done node
    std::vector< int > work_ids{ created++ };
    auto contradicts = [&]( const std::set< int >& old, int f ) {
        const NNode& n = nnf.nodes[ static_cast< std::size_t >( f ) ];
        if ( n.op == N::falsity )
            return true;
        if ( n.op == N::pos || n.op == N::neg )
        {
            NNode dual = n;
            dual.op = n.op == N::pos ? N::neg : N::pos;
            for ( int o : old )
                if ( nnf.nodes[ static_cast< std::size_t >( o ) ] == dual )
                    return true;
        }
        return false;
    };

    // Incoming sets name finished nodes by the id they had while expanding.
    std::map< int, std::size_t > done_index;
    while ( !work.empty() )
    {
        TNode node = std::move( work.back() );
        int id = work_ids.back();
        work.pop_back();
        work_ids.pop_back();
        if ( node.fresh.empty() )
        {
            auto same = std::ranges::find_if( done, [&]( const TNode& d ) {
                return d.old == node.old && d.next == node.next;
            } );
            if ( same != done.end() )
            {
                same->incoming.insert( node.incoming.begin(), node.incoming.end() );
                // Later references to `id` resolve to the merged node.
                done_index[ id ] = static_cast< std::size_t >( same - done.begin() );
                continue;
            }
            done_index[ id ] = done.size();
            done.push_back( node );
            ids.push_back( id );
            work.push_back( TNode{ { id }, node.next, {}, {} } );
            work_ids.push_back( created++ );
            continue;
        }
        int f = *node.fresh.begin();
        node.fresh.erase( node.fresh.begin() );
        if ( node.old.contains( f ) )
        {
            work.push_back( std::move( node ) );
            work_ids.push_back( id );
            continue;
        }
        const NNode n = nnf.nodes[ static_cast< std::size_t >( f ) ];
        auto add_fresh = [&]( TNode& t, int g ) {
            if ( !t.old.contains( g ) )
                t.fresh.insert( g );
        };
        switch ( n.op )
        {
        case N::truth:
        case N::falsity:
        case N::pos:
        case N::neg:
            if ( contradicts( node.old, f ) )
                continue;
            node.old.insert( f );
            work.push_back( std::move( node ) );
            work_ids.push_back( id );
            break;
        case N::and_:
            add_fresh( node, n.a );
            add_fresh( node, n.b );
            node.old.insert( f );
            work.push_back( std::move( node ) );
            work_ids.push_back( id );
            break;
        case N::next:
            node.old.insert( f );
            node.next.insert( n.a );
            work.push_back( std::move( node ) );
            work_ids.push_back( id );
            break;
        case N::or_:
        case N::until:
        case N::release:
        {
            TNode left = node;
            TNode right = node;
            left.old.insert( f );
            right.old.insert( f );
            if ( n.op == N::or_ )
            {
                add_fresh( left, n.a );
                add_fresh( right, n.b );
            }
            else if ( n.op == N::until )
            {
                add_fresh( left, n.a );
                left.next.insert( f );
                add_fresh( right, n.b );
            }
            else
            {
                add_fresh( left, n.b );
                left.next.insert( f );
                add_fresh( right, n.a );
                add_fresh( right, n.b );
            }
            work.push_back( std::move( right ) );
            work_ids.push_back( created++ );
            work.push_back( std::move( left ) );
            work_ids.push_back( created++ );
            break;
        }
        }
    }

    Automaton a;
    const std::size_t count = done.size();
    a.old.resize( count );
    a.succ.resize( count );
    a.must_true.assign( count, 0 );
    a.must_false.assign( count, 0 );
    std::vector< int > untils;
    for ( std::size_t f = 0; f < nnf.nodes.size(); ++f )
        if ( nnf.nodes[ f ].op == N::until )
            untils.push_back( static_cast< int >( f ) );
    a.accepting.assign( untils.size(), std::vector< bool >( count, false ) );
    for ( std::size_t i = 0; i < count; ++i )
    {
        a.old[ i ] = done[ i ].old;
        for ( int f : done[ i ].old )
        {
            const NNode& n = nnf.nodes[ static_cast< std::size_t >( f ) ];
            if ( n.op == N::pos )
                a.must_true[ i ] |= Label{ 1 } << n.atom;
            if ( n.op == N::neg )
                a.must_false[ i ] |= Label{ 1 } << n.atom;
        }
        for ( std::size_t u = 0; u < untils.size(); ++u )
        {
            const NNode& n = nnf.nodes[ static_cast< std::size_t >( untils[ u ] ) ];
            a.accepting[ u ][ i ] = !done[ i ].old.contains( untils[ u ] ) || done[ i ].old.contains( n.b );
        }
    }
    // Node j succeeds node i when i's id is among j's incoming ids.
    for ( std::size_t j = 0; j < count; ++j )
        for ( int src : done[ j ].incoming )
        {
            if ( src == -1 )
            {
                a.initial.push_back( static_cast< int >( j ) );
                continue;
            }
            auto it = done_index.find( src );
            if ( it != done_index.end() )
                a.succ[ it->second ].push_back( static_cast< int >( j ) );
        }
    for ( auto& s : a.succ )
    {
        std::ranges::sort( s );
        s.erase( std::unique( s.begin(), s.end() ), s.end() );
    }
    std::ranges::sort( a.initial );
    a.initial.erase( std::unique( a.initial.begin(), a.initial.end() ), a.initial.end() );
    return a;
}

struct Product
{
    std::vector< std::uint32_t > knode; // index into the transition graph
    std::vector< int > qnode;
    std::vector< std::vector< std::uint32_t > > succ;
    std::vector< std::optional< std::uint32_t > > parent;
};

// Transition graph: one node per transition plus a stutter node for every
// deadlock state, grouped by source state.
struct Graph
{
    std::vector< std::uint32_t > move; // transition id or stutter
    std::vector< std::uint32_t > src;
    std::vector< std::uint32_t > dst;
    std::vector< std::uint32_t > begin; // per state
    std::vector< Label > label;
};

Graph build_graph( const specml::StateSpace& space, const detail::Atoms& atoms )
{
    Graph g;
    g.begin.reserve( space.size() + 1 );
    for ( std::uint32_t s = 0; s < space.size(); ++s )
    {
        g.begin.push_back( static_cast< std::uint32_t >( g.move.size() ) );
        for ( std::uint32_t mv : detail::moves( space, s ) )
        {
            g.move.push_back( mv );
            g.src.push_back( s );
            g.dst.push_back( detail::target( space, s, mv ) );
        }
    }
    g.begin.push_back( static_cast< std::uint32_t >( g.move.size() ) );
    g.label.resize( g.move.size() );
    const auto n = static_cast< std::ptrdiff_t >( g.move.size() );
    std::optional< Error > failure;
#pragma omp parallel for schedule( static ) if ( n > 256 )
    for ( std::ptrdiff_t i = 0; i < n; ++i )
    {
        auto k = static_cast< std::size_t >( i );
        try
        {
            g.label[ k ] = atoms.label( space.states[ g.src[ k ] ], space.states[ g.dst[ k ] ] );
        }
        catch ( const Error& e )
        {
#pragma omp critical( vdd_engine_label )
            if ( !failure )
                failure = e;
        }
    }
    if ( failure )
        throw *failure;
    return g;
}

// Iterative Tarjan; components numbered in completion order.
std::vector< std::uint32_t > components( const Product& p, std::vector< bool >& nontrivial )
{
    const std::size_t n = p.knode.size();
    constexpr std::uint32_t unset = std::numeric_limits< std::uint32_t >::max();
    std::vector< std::uint32_t > index( n, unset ), low( n, 0 ), comp( n, unset );
    std::vector< std::uint32_t > stack;
    std::vector< bool > on_stack( n, false );
    std::uint32_t counter = 0, count = 0;
    std::vector< std::pair< std::uint32_t, std::size_t > > call;
    for ( std::uint32_t root = 0; root < n; ++root )
    {
        if ( index[ root ] != unset )
            continue;
        call.emplace_back( root, 0 );
        while ( !call.empty() )
        {
            auto& [ v, i ] = call.back();
            if ( i == 0 )
            {
                index[ v ] = low[ v ] = counter++;
                stack.push_back( v );
                on_stack[ v ] = true;
            }
            if ( i < p.succ[ v ].size() )
            {
                std::uint32_t w = p.succ[ v ][ i++ ];
                if ( index[ w ] == unset )
                    call.emplace_back( w, 0 );
                else if ( on_stack[ w ] )
                    low[ v ] = std::min( low[ v ], index[ w ] );
                continue;
            }
            if ( low[ v ] == index[ v ] )
            {
                std::uint32_t w;
                std::size_t size = 0;
                bool self = false;
                do
                {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[ w ] = false;
                    comp[ w ] = count;
                    ++size;
                } while ( w != v );
                for ( auto s : p.succ[ v ] )
                    self = self || s == v;
                nontrivial.push_back( size > 1 || self );
                ++count;
            }
            std::uint32_t done = v;
            call.pop_back();
            if ( !call.empty() )
            {
                auto parent = call.back().first;
                low[ parent ] = std::min( low[ parent ], low[ done ] );
            }
        }
    }
    return comp;
}

// Shortest path inside one component from `from` to any node satisfying
// `goal`, excluding the trivial path unless `allow_empty`.
std::vector< std::uint32_t > path_within( const Product& p, const std::vector< std::uint32_t >& comp,
                                          std::uint32_t from, auto goal, bool allow_empty )
{
    if ( allow_empty && goal( from ) )
        return { from };
    std::unordered_map< std::uint32_t, std::uint32_t > parent;
    std::deque< std::uint32_t > queue;
    for ( auto s : p.succ[ from ] )
        if ( comp[ s ] == comp[ from ] && !parent.contains( s ) )
        {
            parent[ s ] = from;
            queue.push_back( s );
        }
    while ( !queue.empty() )
    {
        auto v = queue.front();
        queue.pop_front();
        if ( goal( v ) )
        {
            std::vector< std::uint32_t > path{ v };
            while ( path.back() != from || path.size() == 1 )
            {
                path.push_back( parent.at( path.back() ) );
                if ( path.back() == from )
                    break;
            }
            std::ranges::reverse( path );
            return path;
        }
        for ( auto s : p.succ[ v ] )
            if ( comp[ s ] == comp[ from ] && !parent.contains( s ) )
            {
                parent[ s ] = v;
                queue.push_back( s );
            }
    }
    return {};
}

std::vector< std::uint32_t > reachable_states( const specml::StateSpace& space,
                                               const std::vector< std::uint32_t >& starts )
{
    std::vector< bool > seen( space.size(), false );
    std::vector< std::uint32_t > stack;
    for ( auto s : starts )
        if ( !seen[ s ] )
        {
            seen[ s ] = true;
            stack.push_back( s );
        }
    while ( !stack.empty() )
    {
        auto s = stack.back();
        stack.pop_back();
        for ( const auto& t : space.out( s ) )
            if ( !seen[ t.target ] )
            {
                seen[ t.target ] = true;
                stack.push_back( t.target );
            }
    }
    std::vector< std::uint32_t > out;
    for ( std::uint32_t s = 0; s < space.size(); ++s )
        if ( seen[ s ] )
            out.push_back( s );
    return out;
}

} // namespace

TaskResult eval_ltl( const volang::Ltl& formula, const specml::CompiledMachine& m, const specml::StateSpace& space,
                     const Starts& starts )
{
    TaskResult result;
    detail::Atoms atoms{ formula, m };
    if ( space.truncated )
    {
        result.verdict = Verdict::inconclusive;
        result.detail = "state space truncated at " + std::to_string( space.cap ) + " states";
        return result;
    }
    std::vector< std::uint32_t > start_states = starts ? *starts : space.initial;
    std::ranges::sort( start_states );
    start_states.erase( std::unique( start_states.begin(), start_states.end() ), start_states.end() );

    Graph g;
    try
    {
        g = build_graph( space, atoms );
    }
    catch ( const specml::EvalError& e )
    {
        result.error = e.diagnostic();
        result.detail = e.what();
        return result;
    }

    Nnf nnf;
    int root = nnf.build( formula, true, atoms );
    Automaton a = translate( nnf, root );

    auto matches = [&]( std::uint32_t k, int q ) {
        auto qi = static_cast< std::size_t >( q );
        Label l = g.label[ k ];
        return ( l & a.must_true[ qi ] ) == a.must_true[ qi ] && ( l & a.must_false[ qi ] ) == 0;
    };

    Product p;
    std::unordered_map< std::uint64_t, std::uint32_t > index;
    std::deque< std::uint32_t > queue;
    auto visit = [&]( std::uint32_t k, int q, std::optional< std::uint32_t > parent ) {
        std::uint64_t key = ( std::uint64_t{ k } << 32 ) | static_cast< std::uint32_t >( q );
        auto [ it, fresh ] = index.emplace( key, static_cast< std::uint32_t >( p.knode.size() ) );
        if ( fresh )
        {
            p.knode.push_back( k );
            p.qnode.push_back( q );
            p.succ.emplace_back();
            p.parent.push_back( parent );
            queue.push_back( it->second );
        }
        return it->second;
    };
    for ( auto s : start_states )
        for ( std::uint32_t k = g.begin[ s ]; k < g.begin[ s + 1 ]; ++k )
            for ( int q : a.initial )
                if ( matches( k, q ) )
                    visit( k, q, std::nullopt );
    while ( !queue.empty() )
    {
        auto v = queue.front();
        queue.pop_front();
        auto k = p.knode[ v ];
        auto q = static_cast< std::size_t >( p.qnode[ v ] );
        auto d = g.dst[ k ];
        std::vector< std::uint32_t > succ;
        for ( std::uint32_t k2 = g.begin[ d ]; k2 < g.begin[ d + 1 ]; ++k2 )
            for ( int q2 : a.succ[ q ] )
                if ( matches( k2, q2 ) )
                    succ.push_back( visit( k2, q2, v ) );
        p.succ[ v ] = std::move( succ );
    }

    std::vector< bool > nontrivial;
    auto comp = components( p, nontrivial );
    std::vector< bool > accepting( nontrivial.size(), false );
    for ( std::size_t c = 0; c < nontrivial.size(); ++c )
        accepting[ c ] = nontrivial[ c ];
    for ( const auto& set : a.accepting )
    {
        std::vector< bool > hit( nontrivial.size(), false );
        for ( std::size_t v = 0; v < p.knode.size(); ++v )
            if ( set[ static_cast< std::size_t >( p.qnode[ v ] ) ] )
                hit[ comp[ v ] ] = true;
        for ( std::size_t c = 0; c < accepting.size(); ++c )
            accepting[ c ] = accepting[ c ] && hit[ c ];
    }

    // Product ids follow BFS discovery, so the first hit has a shortest stem.
    std::optional< std::uint32_t > entry;
    for ( std::uint32_t v = 0; v < p.knode.size() && !entry; ++v )
        if ( accepting[ comp[ v ] ] )
            entry = v;

    if ( !entry )
    {
        result.verdict = Verdict::pass;
        result.carrier = reachable_states( space, start_states );
        return result;
    }

    std::vector< std::uint32_t > stem;
    for ( std::optional< std::uint32_t > v = p.parent[ *entry ]; v; v = p.parent[ *v ] )
        stem.push_back( *v );
    std::ranges::reverse( stem );

    // Cycle through every acceptance set, then back to the entry.
    std::vector< std::uint32_t > cycle{ *entry };
    for ( const auto& set : a.accepting )
    {
        auto leg = path_within(
            p, comp, cycle.back(), [&]( std::uint32_t v ) { return set[ static_cast< std::size_t >( p.qnode[ v ] ) ]; },
            true );
        cycle.insert( cycle.end(), leg.begin() + 1, leg.end() );
    }
    auto back = path_within( p, comp, cycle.back(), [&]( std::uint32_t v ) { return v == *entry; }, false );
    cycle.insert( cycle.end(), back.begin() + 1, back.end() - 1 );

    Evidence& ev = result.evidence;
    ev.kind = Evidence::Kind::lasso;
    std::uint32_t first = stem.empty() ? *entry : stem.front();
    std::uint32_t begin = g.src[ p.knode[ first ] ];
    if ( !space.is_initial( begin ) )
        ev.stem = space.trace_to( begin );
    ev.prefix = ev.stem.size();
    ev.start = ev.stem.empty() ? begin : space.transitions[ ev.stem.front() ].source;
    for ( auto v : stem )
        ev.stem.push_back( g.move[ p.knode[ v ] ] );
    for ( auto v : cycle )
        ev.cycle.push_back( g.move[ p.knode[ v ] ] );
    ev.state = g.src[ p.knode[ *entry ] ];
    result.verdict = Verdict::fail;
    result.detail = "counterexample lasso with stem " + std::to_string( ev.stem.size() - ev.prefix ) + " and cycle "
                  + std::to_string( ev.cycle.size() );
    return result;
}

} // namespace vdd::engine
