#include "support.hpp"

#include "vdd/specml/explore.hpp"
#include "vdd/specml/model.hpp"
#include "vdd/specml/parser.hpp"

#include <doctest.h>

#include <random>
#include <set>

using namespace vdd;
using namespace vdd::specml;

namespace
{

std::set< std::vector< std::int64_t > > integer_states( const StateSpace& space )
{
    std::set< std::vector< std::int64_t > > out;
    for ( const auto& s : space.states )
    {
        std::vector< std::int64_t > v;
        for ( const auto& x : s )
            v.push_back( x.as_int() );
        out.insert( v );
    }
    return out;
}

} // namespace

TEST_CASE( "lift space has three floors and four moves" )
{
    auto m = test::machine( "lift/M0.mch" );
    auto space = explore( m );
    CHECK( space.size() == 3 );
    CHECK( space.transitions.size() == 4 );
    CHECK_FALSE( space.truncated );
    CHECK( check_invariants( space, m ).empty() );
}

TEST_CASE( "AMAN M0 reaches every subset of the three airplanes" )
{
    auto m = test::machine( "aman/M0.mch", { "aman/C0.ctx" } );
    auto space = explore( m );
    // Subset lattice of a 3-element set: 8 states, 3 * 2^2 = 12 additions.
    CHECK( space.size() == 8 );
    CHECK( space.transitions.size() == 12 );
}

TEST_CASE( "AMAN M1 space matches an enumeration of separated schedules" )
{
    auto m = test::machine( "aman/M1.mch", { "aman/C0.ctx" }, { "aman/M0.mch" } );
    auto space = explore( m );
    // Oracle: partial maps {a1,a2,a3} -> 0..12 with pairwise distance >= 3.
    // Every such map is reachable by adding its airplanes in any order.
    std::size_t expected = 0;
    for ( int x = -1; x <= 12; ++x )
        for ( int y = -1; y <= 12; ++y )
            for ( int z = -1; z <= 12; ++z )
            {
                std::vector< int > slots;
                for ( int v : { x, y, z } )
                    if ( v >= 0 )
                        slots.push_back( v );
                bool ok = true;
                for ( std::size_t i = 0; i < slots.size(); ++i )
                    for ( std::size_t j = i + 1; j < slots.size(); ++j )
                        ok = ok && std::abs( slots[ i ] - slots[ j ] ) >= 3;
                expected += ok ? 1 : 0;
            }
    CHECK( space.size() == expected );
    CHECK( check_invariants( space, m ).empty() );
}

TEST_CASE( "gap-2 variant violates the separation invariant in its initial state" )
{
    auto m = test::machine( "aman/variants/M1_gap2.mch", { "aman/C0.ctx" }, { "aman/M0.mch" } );
    auto space = explore( m );
    auto violations = check_invariants( space, m );
    REQUIRE_FALSE( violations.empty() );
    CHECK( violations.front().label == "inv2" );
    CHECK( violations.front().trace.empty() );
}

TEST_CASE( "parallel exploration equals the serial reference" )
{
    for ( const char* file : { "aman/M1.mch", "aman/variants/M1b_refines.mch" } )
    {
        std::vector< std::string > others{ "aman/M0.mch", "aman/M1.mch" };
        auto m = test::machine( file, { "aman/C0.ctx" }, others );
        auto a = explore( m );
        auto b = explore_serial( m );
        CHECK( a.states == b.states );
        CHECK( a.transitions == b.transitions );
        CHECK( a.initial == b.initial );
        CHECK( a.parent == b.parent );
        auto va = check_invariants( a, m );
        auto vb = check_invariants_serial( b, m );
        CHECK( va.size() == vb.size() );
    }
}

TEST_CASE( "cap truncates and flags the space" )
{
    auto m = test::machine( "aman/M1.mch", { "aman/C0.ctx" }, { "aman/M0.mch" } );
    auto space = explore( m, 10 );
    CHECK( space.truncated );
    CHECK( space.size() == 10 );
    CHECK( explore_serial( m, 10 ).states == space.states );
    CHECK_THROWS_AS( explore( m, 0 ), Error );
}

TEST_CASE( "random counter machines agree with a direct closure" )
{
    std::mt19937 rng{ 7 };
    for ( int round = 0; round < 40; ++round )
    {
        // x, y in 0..4; each event: when x < gx & y >= gy then x := (x + dx) mod 5, y := (y + dy) mod 5
        struct Ev
        {
            int gx, gy, dx, dy;
        };
        std::vector< Ev > evs;
        int count = 1 + static_cast< int >( rng() % 3 );
        for ( int i = 0; i < count; ++i )
            evs.push_back( { static_cast< int >( rng() % 6 ), static_cast< int >( rng() % 5 ),
                             static_cast< int >( rng() % 5 ), static_cast< int >( rng() % 5 ) } );
        int x0 = static_cast< int >( rng() % 5 ), y0 = static_cast< int >( rng() % 5 );
        std::string text = "machine R\nvariables\n  x, y : 0..4\nevents\n  event INITIALISATION\n  then\n    x := "
                         + std::to_string( x0 ) + "\n    y := " + std::to_string( y0 ) + "\n  end\n";
        for ( int i = 0; i < count; ++i )
        {
            const auto& e = evs[ static_cast< std::size_t >( i ) ];
            text += "  event e" + std::to_string( i ) + "\n  when x < " + std::to_string( e.gx ) + " & y >= "
                  + std::to_string( e.gy ) + "\n  then\n    x := (x + " + std::to_string( e.dx ) + ") mod 5\n    y := (y + "
                  + std::to_string( e.dy ) + ") mod 5\n  end\n";
        }
        text += "end\n";
        auto m = test::machine_text( text );
        auto space = explore( m );

        std::set< std::vector< std::int64_t > > closure{ { x0, y0 } };
        std::vector< std::vector< std::int64_t > > work{ { x0, y0 } };
        while ( !work.empty() )
        {
            auto s = work.back();
            work.pop_back();
            for ( const auto& e : evs )
                if ( s[ 0 ] < e.gx && s[ 1 ] >= e.gy )
                {
                    std::vector< std::int64_t > t{ ( s[ 0 ] + e.dx ) % 5, ( s[ 1 ] + e.dy ) % 5 };
                    if ( closure.insert( t ).second )
                        work.push_back( t );
                }
        }
        CHECK( integer_states( space ) == closure );
    }
}

TEST_CASE( "machine print reparses to the same tree" )
{
    for ( const char* file : { "lift/M0.mch", "aman/M0.mch", "aman/M1.mch", "aman/variants/M1b_refines.mch" } )
    {
        auto spec = parse_machine( test::slurp( test::corpus( file ) ) );
        auto again = parse_machine( print( spec ) );
        CHECK( print( again ) == print( spec ) );
    }
    auto ctx = parse_context( test::slurp( test::corpus( "aman/C0.ctx" ) ) );
    CHECK( print( parse_context( print( ctx ) ) ) == print( ctx ) );
}

TEST_CASE( "expression printing keeps precedence" )
{
    for ( const char* text : { "a & b or c", "a => b => c", "not (x = 1) & y < 2", "x + y * 2 - 1", "f <+ {a |-> 1}",
                               "forall z . z : S => z /: T", "-3 + x mod 2", "card(dom(f) \\/ ran(g)) >= 2" } )
    {
        auto e = parse_expression( text );
        CHECK_MESSAGE( same( parse_expression( print( e ) ), e ), text );
    }
}

TEST_CASE( "typechecking reports unbounded variables and unknown names" )
{
    auto diag = typecheck( parse_machine( "machine B\nvariables\n  n : NAT\nevents\n  event INITIALISATION\n  then n := 0\n  end\nend\n" ), {} );
    REQUIRE_FALSE( diag.empty() );
    CHECK( diag.front().code == "E-TYPE-003" );
    diag = typecheck( parse_machine( "machine B\nvariables\n  n : 0..3\nevents\n  event INITIALISATION\n  then n := q\n  end\nend\n" ), {} );
    REQUIRE_FALSE( diag.empty() );
    CHECK( diag.front().code == "E-TYPE-001" );
}

TEST_CASE( "evaluation errors carry their codes" )
{
    auto m = test::machine_text( "machine D\nvariables\n  n : 0..3\nevents\n  event INITIALISATION\n  then n := 0\n  end\n"
                                 "  event bump\n  then n := 3 / n\n  end\nend\n" );
    CHECK_THROWS_WITH_AS( explore( m ), doctest::Contains( "zero" ), EvalError );
}
