#include "support.hpp"

#include "vdd/frame.hpp"
#include "vdd/volang.hpp"

#include <doctest.h>

#include <random>

using namespace vdd;
using namespace vdd::volang;

namespace
{

std::string random_ltl( std::mt19937& rng, int depth )
{
    static const char* atoms[] = { "{x = 1}", "{y > 0}", "BA(x /= x$0)", "true", "false" };
    if ( depth == 0 || rng() % 4 == 0 )
        return atoms[ rng() % 5 ];
    switch ( rng() % 9 )
    {
    case 0:
        return "not " + random_ltl( rng, depth - 1 );
    case 1:
        return "G(" + random_ltl( rng, depth - 1 ) + ")";
    case 2:
        return "F " + random_ltl( rng, depth - 1 );
    case 3:
        return "X(" + random_ltl( rng, depth - 1 ) + ")";
    case 4:
        return random_ltl( rng, depth - 1 ) + " & " + random_ltl( rng, depth - 1 );
    case 5:
        return random_ltl( rng, depth - 1 ) + " or " + random_ltl( rng, depth - 1 );
    case 6:
        return random_ltl( rng, depth - 1 ) + " => " + random_ltl( rng, depth - 1 );
    case 7:
        return random_ltl( rng, depth - 1 ) + " U " + random_ltl( rng, depth - 1 );
    default:
        return "(" + random_ltl( rng, depth - 1 ) + ")";
    }
}

std::string random_vo( std::mt19937& rng, int depth )
{
    static const char* tasks[] = { "INV({x = 1})", "EXISTS({y > 0})", "LTL(G({x >= 0}))", "TRACE(e; f(1))",
                                   "A := INV({x < 3})[D]" };
    if ( depth == 0 || rng() % 3 == 0 )
        return tasks[ rng() % 5 ];
    static const char* ops[] = { " & ", " or ", " ; " };
    std::string s = random_vo( rng, depth - 1 ) + ops[ rng() % 3 ] + random_vo( rng, depth - 1 );
    return rng() % 2 ? "(" + s + ")" : s;
}

// Hand-written tree shape: kinds in prefix order.
std::string shape( const VOExpr& e )
{
    switch ( e.kind )
    {
    case NodeKind::task:
        return std::string{ to_string( e.task->kind ) };
    case NodeKind::and_:
        return "and(" + shape( e.children[ 0 ] ) + "," + shape( e.children[ 1 ] ) + ")";
    case NodeKind::or_:
        return "or(" + shape( e.children[ 0 ] ) + "," + shape( e.children[ 1 ] ) + ")";
    case NodeKind::seq:
        return "seq(" + shape( e.children[ 0 ] ) + "," + shape( e.children[ 1 ] ) + ")";
    }
    return {};
}

} // namespace

TEST_CASE( "corpus obligations parse and print stably" )
{
    for ( const char* f : { "aman/aman.vo", "lift/lift.vo", "aman/variants/M2_user.vo" } )
    {
        auto file = parse_vo_file( test::slurp( test::corpus( f ) ) );
        REQUIRE_FALSE( file.obligations.empty() );
        for ( const auto& vo : file.obligations )
            CHECK_MESSAGE( same( parse_vo( print( vo ) ), vo ), print( vo ) );
    }
    auto lift = parse_vo_file( test::slurp( test::corpus( "lift/lift.vo" ) ) );
    REQUIRE( lift.notes.size() == 1 );
    CHECK( lift.notes[ 0 ].id.str() == "REQ0/M0" );
    CHECK( shape( lift.obligations[ 2 ].expr ) == "seq(TRACE,INV)" );
    CHECK( lift.obligations[ 0 ].expr.task->label == "LTL1" );
}

TEST_CASE( "unlabeled formulas are classified by their content" )
{
    auto aman = parse_vo_file( test::slurp( test::corpus( "aman/aman.vo" ) ) );
    REQUIRE( aman.obligations.size() == 3 );
    CHECK( aman.obligations[ 0 ].expr.task->kind == TaskKind::ltl );
    CHECK( aman.obligations[ 1 ].expr.task->kind == TaskKind::inv );
    CHECK( aman.obligations[ 2 ].expr.task->scope == std::vector< std::string >{ "Time" } );
    CHECK( parse_vo( "R/M: G({x = 1})" ).expr.task->kind == TaskKind::ltl );
    CHECK( parse_vo( "R/M: {x = 1}" ).expr.task->kind == TaskKind::inv );
    CHECK( parse_vo( "R/M: EXISTS := {x = 1}" ).expr.task->kind == TaskKind::exists );
}

TEST_CASE( "combinators bind seq loosest, then or, then and" )
{
    CHECK( shape( parse_vo( "R/M: INV({a}) & INV({b}) or EXISTS({c})" ).expr ) == "or(and(INV,INV),EXISTS)" );
    CHECK( shape( parse_vo( "R/M: INV({a}) or INV({b}) ; EXISTS({c}) & INV({d})" ).expr )
           == "seq(or(INV,INV),and(EXISTS,INV))" );
    CHECK( shape( parse_vo( "R/M: INV({a}) & (INV({b}) ; EXISTS({c}))" ).expr ) == "and(INV,seq(INV,EXISTS))" );
}

TEST_CASE( "random formulas survive print and reparse" )
{
    std::mt19937 rng{ 11 };
    for ( int i = 0; i < 300; ++i )
    {
        auto text = random_ltl( rng, 4 );
        auto f = parse_ltl( text );
        CHECK_MESSAGE( same( parse_ltl( print( f ) ), f ), text );
    }
    for ( int i = 0; i < 200; ++i )
    {
        auto text = "R/M: " + random_vo( rng, 4 );
        auto vo = parse_vo( text );
        auto again = parse_vo( print( vo ) );
        CHECK_MESSAGE( shape( again.expr ) == shape( vo.expr ), text );
        CHECK_MESSAGE( same( again, vo ), text );
    }
}

TEST_CASE( "LTL operators nest as written" )
{
    auto f = parse_ltl( "GF({x = 1}) => {y = 0} U X {x = 2}" );
    REQUIRE( f.op == LtlOp::implies );
    CHECK( f.args[ 0 ].op == LtlOp::globally );
    CHECK( f.args[ 0 ].args[ 0 ].op == LtlOp::finally );
    CHECK( f.args[ 1 ].op == LtlOp::until );
    CHECK( f.args[ 1 ].args[ 1 ].op == LtlOp::next );
    CHECK( depth( f ) == 3 );
    CHECK( print( f ) == "GF({x = 1}) => ({y = 0} U X({x = 2}))" );
}

TEST_CASE( "syntax errors are reported" )
{
    CHECK( test::error_code( [] { parse_vo( "R/M: INV({x = })" ); } ).starts_with( "E-SYNTAX" ) );
    CHECK( test::error_code( [] { parse_vo( "no id here" ); } ).starts_with( "E-SYNTAX" ) );
    CHECK( test::error_code( [] { parse_vo_file( "R/M: INV({x = 1})\nR/M: INV({x = 2})\n" ); } ) == "E-VO-009" );
    CHECK( test::error_code( [] { parse_requirements( "R1: a\nR1: b\n" ); } ) == "E-VO-001" );
}

TEST_CASE( "resolution binds names and infers scopes" )
{
    std::set< std::string > reqs{ "REQ1", "REQ5", "REQ6" };
    std::map< std::string, specml::CompiledMachine, std::less<> > machines;
    machines.emplace( "M0", test::machine( "aman/M0.mch", { "aman/C0.ctx" } ) );
    machines.emplace( "M1", test::machine( "aman/M1.mch", { "aman/C0.ctx" }, { "aman/M0.mch" } ) );
    std::vector< specml::MachineSpec > specs{ specml::parse_machine( test::slurp( test::corpus( "aman/M0.mch" ) ) ),
                                              specml::parse_machine( test::slurp( test::corpus( "aman/M1.mch" ) ) ) };
    auto main = frame::parse_frame( test::slurp( test::corpus( "aman/aman.frame" ) ) );
    std::vector< frame::ProblemFrame > subs{ frame::parse_frame( test::slurp( test::corpus( "aman/schedule.frame" ) ) ) };
    auto all = frame::union_frame( main, subs );
    ResolveContext ctx{ &reqs, &machines, &specs, &all };

    auto file = parse_vo_file( test::slurp( test::corpus( "aman/aman.vo" ) ) );
    for ( auto& vo : file.obligations )
        CHECK_MESSAGE( resolve( vo, ctx ).empty(), vo.id.str() );
    CHECK( scope_of( file.obligations[ 0 ] ) == std::vector< std::string >{ "Aircraft", "Schedule" } );
    CHECK( scope_of( file.obligations[ 2 ] ) == std::vector< std::string >{ "Time" } );

    auto code = [ & ]( const std::string& text ) {
        auto vo = parse_vo( text );
        auto diag = resolve( vo, ctx );
        return diag.empty() ? std::string{} : diag.front().code;
    };
    CHECK( code( "REQ9/M0: INV({card(scheduledAirplanes) <= 3})" ) == "E-VO-002" );
    CHECK( code( "REQ1/M7: INV({card(scheduledAirplanes) <= 3})" ) == "E-VO-003" );
    CHECK( code( "REQ1/M0: INV({nothing = 1})" ) == "E-VO-004" );
    CHECK( code( "REQ1/M0: INV({scheduledAirplanes = 1})" ) == "E-VO-005" );
    CHECK( code( "REQ1/M0: INV({scheduledAirplanes = scheduledAirplanes$0})" ) == "E-VO-006" );
    CHECK( code( "REQ1/M0: INV({card(scheduledAirplanes) <= 3})[Weather]" ) == "E-VO-007" );
    CHECK( code( "REQ1/M0: TRACE(addAirplane(a9))" ) == "E-VO-008" );
    CHECK( code( "REQ1/M0: TRACE(takeOff)" ) == "E-VO-004" );
    CHECK( code( "REQ1/M0: TRACE(addAirplane(a1); addAirplane(a=a2))" ).empty() );
}
