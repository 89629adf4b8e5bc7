#include "atoms.hpp"

namespace vdd::engine::detail
{

namespace
{

void collect( const volang::Ltl& f, std::vector< const volang::Ltl* >& out )
{
    if ( f.op == volang::LtlOp::state || f.op == volang::LtlOp::ba )
        out.push_back( &f );
    for ( const auto& a : f.args )
        collect( a, out );
}

std::vector< bool > values( const volang::Ltl& f, const Atoms& atoms, std::span< const Label > labels,
                            std::size_t loop )
{
    using volang::LtlOp;
    const std::size_t n = labels.size();
    auto next = [&]( std::size_t i ) { return i + 1 < n ? i + 1 : loop; };
    std::vector< bool > v( n, false );
    switch ( f.op )
    {
    case LtlOp::state:
    case LtlOp::ba:
    {
        auto bit = Label{ 1 } << atoms.index.at( &f );
        for ( std::size_t i = 0; i < n; ++i )
            v[ i ] = ( labels[ i ] & bit ) != 0;
        return v;
    }
    case LtlOp::truth:
        v.assign( n, true );
        return v;
    case LtlOp::falsity:
        return v;
    case LtlOp::not_:
    {
        auto a = values( f.args[ 0 ], atoms, labels, loop );
        for ( std::size_t i = 0; i < n; ++i )
            v[ i ] = !a[ i ];
        return v;
    }
    case LtlOp::and_:
    case LtlOp::or_:
    case LtlOp::implies:
    {
        auto a = values( f.args[ 0 ], atoms, labels, loop );
        auto b = values( f.args[ 1 ], atoms, labels, loop );
        for ( std::size_t i = 0; i < n; ++i )
            v[ i ] = f.op == LtlOp::and_ ? a[ i ] && b[ i ] : f.op == LtlOp::or_ ? a[ i ] || b[ i ] : !a[ i ] || b[ i ];
        return v;
    }
    case LtlOp::next:
    {
        auto a = values( f.args[ 0 ], atoms, labels, loop );
        for ( std::size_t i = 0; i < n; ++i )
            v[ i ] = a[ next( i ) ];
        return v;
    }
    case LtlOp::globally:
    case LtlOp::finally:
    case LtlOp::until:
    {
        // Fixpoint iteration over the finite word: G is greatest, F and U
        // least. 2n sweeps settle every position.
        bool greatest = f.op == LtlOp::globally;
        auto a = values( f.args[ 0 ], atoms, labels, loop );
        std::vector< bool > b;
        if ( f.op == LtlOp::until )
            b = values( f.args[ 1 ], atoms, labels, loop );
        v.assign( n, greatest );
        for ( std::size_t sweep = 0; sweep < 2 * n + 1; ++sweep )
        {
            bool changed = false;
            for ( std::size_t k = n; k-- > 0; )
            {
                bool nv = f.op == LtlOp::globally ? a[ k ] && v[ next( k ) ]
                        : f.op == LtlOp::finally ? a[ k ] || v[ next( k ) ]
                                                 : b[ k ] || ( a[ k ] && v[ next( k ) ] );
                if ( nv != v[ k ] )
                {
                    v[ k ] = nv;
                    changed = true;
                }
            }
            if ( !changed )
                break;
        }
        return v;
    }
    }
    return v;
}

} // namespace

Atoms::Atoms( const volang::Ltl& formula, const specml::CompiledMachine& m )
{
    collect( formula, atoms );
    if ( atoms.size() > 64 )
        throw Error( "E-ENG-002", "formula has more than 64 atoms", formula.span );
    for ( std::size_t i = 0; i < atoms.size(); ++i )
    {
        index[ atoms[ i ] ] = i;
        try
        {
            predicates.push_back(
                specml::compile_predicate( m, atoms[ i ]->predicate, atoms[ i ]->op == volang::LtlOp::ba ) );
        }
        catch ( const Error& e )
        {
            throw Error( "E-ENG-001", e.what(), e.span() );
        }
    }
}

Label Atoms::label( const specml::State& pre, const specml::State& post ) const
{
    Label out = 0;
    for ( std::size_t i = 0; i < atoms.size(); ++i )
    {
        bool v = atoms[ i ]->op == volang::LtlOp::ba ? specml::holds( predicates[ i ], post, &pre )
                                                      : specml::holds( predicates[ i ], pre );
        if ( v )
            out |= Label{ 1 } << i;
    }
    return out;
}

std::vector< std::uint32_t > moves( const specml::StateSpace& space, std::uint32_t state )
{
    std::vector< std::uint32_t > out;
    for ( std::uint32_t t = space.out_begin[ state ]; t < space.out_begin[ state + 1 ]; ++t )
        out.push_back( t );
    if ( out.empty() )
        out.push_back( stutter );
    return out;
}

std::uint32_t target( const specml::StateSpace& space, std::uint32_t state, std::uint32_t move )
{
    return move == stutter ? state : space.transitions[ move ].target;
}

bool holds_on_word( const volang::Ltl& formula, const Atoms& atoms, std::span< const Label > labels,
                    std::size_t loop )
{
    return values( formula, atoms, labels, loop ).at( 0 );
}

} // namespace vdd::engine::detail
