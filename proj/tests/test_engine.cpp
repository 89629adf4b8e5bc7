#include "support.hpp"

#include "vdd/engine.hpp"
#include "vdd/volang.hpp"

#include <doctest.h>

#include <random>

using namespace vdd;
using namespace vdd::engine;
using vdd::volang::parse_ltl;
using vdd::volang::parse_vo;

namespace
{

struct Fixture
{
    specml::CompiledMachine m;
    specml::StateSpace space;

    explicit Fixture( specml::CompiledMachine machine ) : m{ std::move( machine ) }, space{ specml::explore( m ) } {}
};

Fixture lift() { return Fixture{ test::machine( "lift/M0.mch" ) }; }
Fixture aman0() { return Fixture{ test::machine( "aman/M0.mch", { "aman/C0.ctx" } ) }; }
Fixture aman1( const std::string& file = "aman/M1.mch" )
{
    return Fixture{ test::machine( file, { "aman/C0.ctx" }, { "aman/M0.mch" } ) };
}

volang::Task task( const std::string& text ) { return *parse_vo( "R/M: " + text ).expr.task; }

Verdict verdict_of( const std::string& vo, const Fixture& f ) { return eval_vo( parse_vo( "R/M: " + vo ).expr, f.m, f.space ).verdict; }

std::string random_formula( std::mt19937& rng, int depth )
{
    auto k = std::to_string( rng() % 4 );
    if ( depth == 0 || rng() % 4 == 0 )
    {
        switch ( rng() % 4 )
        {
        case 0:
            return "{x = " + k + "}";
        case 1:
            return "{x < " + k + "}";
        case 2:
            return "BA(x /= x$0)";
        default:
            return "{y = 1}";
        }
    }
    auto a = random_formula( rng, depth - 1 );
    switch ( rng() % 8 )
    {
    case 0:
        return "not (" + a + ")";
    case 1:
        return "G(" + a + ")";
    case 2:
        return "F(" + a + ")";
    case 3:
        return "X(" + a + ")";
    case 4:
        return "(" + a + ") & (" + random_formula( rng, depth - 1 ) + ")";
    case 5:
        return "(" + a + ") or (" + random_formula( rng, depth - 1 ) + ")";
    case 6:
        return "(" + a + ") U (" + random_formula( rng, depth - 1 ) + ")";
    default:
        return "(" + a + ") => (" + random_formula( rng, depth - 1 ) + ")";
    }
}

// x in 0..3, y in 0..1; random guarded updates, some machines deadlock.
specml::CompiledMachine random_machine( std::mt19937& rng )
{
    std::string text = "machine R\nvariables\n  x : 0..3\n  y : 0..1\nevents\n  event INITIALISATION\n  then\n    x := "
                     + std::to_string( rng() % 4 ) + "\n    y := 0\n  end\n";
    int count = 1 + static_cast< int >( rng() % 3 );
    for ( int i = 0; i < count; ++i )
        text += "  event e" + std::to_string( i ) + "\n  when x /= " + std::to_string( rng() % 5 ) + "\n  then\n    x := (x + "
              + std::to_string( 1 + rng() % 3 ) + ") mod 4\n    y := " + std::to_string( rng() % 2 ) + "\n  end\n";
    text += "end\n";
    return test::machine_text( text );
}

} // namespace

TEST_CASE( "lift: FG floor = 1 fails with a replayable lasso" )
{
    auto f = lift();
    auto t = task( "LTL1 := FG({floor = 1})" );
    auto r = eval_task( t, f.m, f.space );
    CHECK( r.verdict == Verdict::fail );
    CHECK( r.evidence.kind == Evidence::Kind::lasso );
    CHECK_FALSE( r.evidence.cycle.empty() );
    CHECK_FALSE( check_evidence( t, r, f.m, f.space ).has_value() );
    CHECK( oracle_ltl( *t.ltl, f.m, f.space ) == Verdict::fail );
    CHECK( verdict_of( "FG({floor = 2})", f ) == Verdict::fail );
    CHECK( verdict_of( "G({floor >= 0 & floor <= 2})", f ) == Verdict::pass );
    CHECK( verdict_of( "G({true})", f ) == Verdict::pass );
    CHECK( verdict_of( "GF({floor = 0})", f ) == Verdict::fail );
    CHECK( verdict_of( "GF({floor = 0}) or FG({floor /= 0})", f ) == Verdict::pass );
    // State atoms read the source of a move, so the effect shows one step on.
    CHECK( verdict_of( "G(BA(floor = floor$0 + 1) => {floor > 0})", f ) == Verdict::fail );
    CHECK( verdict_of( "G(BA(floor = floor$0 + 1) => X({floor > 0}))", f ) == Verdict::pass );
}

TEST_CASE( "AMAN: additions recur whenever changes recur" )
{
    auto f = aman0();
    auto vo = volang::parse_vo_file( test::slurp( test::corpus( "aman/aman.vo" ) ) );
    auto r = eval_vo( vo.obligations[ 0 ].expr, f.m, f.space );
    CHECK( r.verdict == Verdict::pass );
    CHECK( oracle_ltl( *vo.obligations[ 0 ].expr.task->ltl, f.m, f.space ) == Verdict::pass );

    auto removal = Fixture{ test::machine( "aman/variants/M0_remove_only.mch", { "aman/C0.ctx" } ) };
    CHECK( eval_vo( vo.obligations[ 0 ].expr, removal.m, removal.space ).verdict == Verdict::pass );
    CHECK( verdict_of( "GF(BA(scheduledAirplanes /= scheduledAirplanes$0))", removal ) == Verdict::fail );
}

TEST_CASE( "AMAN: separation holds on M1 and fails on the gap-2 variant" )
{
    auto vo = volang::parse_vo_file( test::slurp( test::corpus( "aman/aman.vo" ) ) );
    const auto& req5 = vo.obligations[ 1 ].expr;
    auto ok = aman1();
    CHECK( eval_vo( req5, ok.m, ok.space ).verdict == Verdict::pass );
    CHECK( eval_vo( vo.obligations[ 2 ].expr, ok.m, ok.space ).verdict == Verdict::pass );

    auto gap = aman1( "aman/variants/M1_gap2.mch" );
    auto r = eval_task( *req5.task, gap.m, gap.space );
    CHECK( r.verdict == Verdict::fail );
    CHECK( r.evidence.kind == Evidence::Kind::trace );
    CHECK( r.evidence.stem.empty() );
    CHECK_FALSE( check_evidence( *req5.task, r, gap.m, gap.space ).has_value() );
}

TEST_CASE( "traces follow enabled events and check the final predicate" )
{
    auto f = lift();
    CHECK( verdict_of( "TRACE(inc; inc; {floor = 2})", f ) == Verdict::pass );
    CHECK( verdict_of( "TRACE(inc; inc; {floor = 1})", f ) == Verdict::fail );
    CHECK( verdict_of( "TRACE([inc, dec], {floor = 0})", f ) == Verdict::pass );

    auto t = task( "TRACE(inc; inc; inc)" );
    auto r = eval_task( t, f.m, f.space );
    CHECK( r.verdict == Verdict::fail );
    REQUIRE( r.error.has_value() );
    CHECK( r.error->code == "E-ENG-010" );
    CHECK( r.error->message.find( "step 3" ) != std::string::npos );

    auto a = aman0();
    CHECK( verdict_of( "TRACE(addAirplane(a1); addAirplane(a2); {card(scheduledAirplanes) = 2})", a ) == Verdict::pass );
    r = eval_task( task( "TRACE(addAirplane(a1); addAirplane(a1))" ), a.m, a.space );
    CHECK( r.verdict == Verdict::fail );
    REQUIRE( r.error.has_value() );
    CHECK( r.error->message.find( "step 2" ) != std::string::npos );
}

TEST_CASE( "EXISTS searches reachable states" )
{
    auto f = lift();
    auto r = eval_task( task( "EXISTS({floor = 2})" ), f.m, f.space );
    CHECK( r.verdict == Verdict::pass );
    CHECK( r.evidence.kind == Evidence::Kind::state );
    CHECK( r.evidence.stem.size() == 2 );
    CHECK( r.carrier.size() == 1 );
    CHECK( verdict_of( "EXISTS({floor > 2})", f ) == Verdict::fail );

    auto user = Fixture{ test::machine( "aman/variants/M2_user.mch", { "aman/C0.ctx" },
                                        { "aman/M0.mch", "aman/M1.mch" } ) };
    auto vo = volang::parse_vo_file( test::slurp( test::corpus( "aman/variants/M2_user.vo" ) ) );
    CHECK( eval_vo( vo.obligations[ 0 ].expr, user.m, user.space ).verdict == Verdict::pass );
}

TEST_CASE( "SEQ hands the left carrier to the right operand" )
{
    auto f = lift();
    auto vo = volang::parse_vo_file( test::slurp( test::corpus( "lift/lift.vo" ) ) );
    auto r = eval_vo( vo.obligations[ 2 ].expr, f.m, f.space );
    CHECK( r.verdict == Verdict::pass );
    REQUIRE( r.children.size() == 2 );
    CHECK( r.children[ 0 ].carrier.size() == 1 );

    // Without SEQ the invariant is false: floor starts at 0.
    CHECK( verdict_of( "INV({floor = 2})", f ) == Verdict::fail );
    CHECK( verdict_of( "EXISTS({floor = 2}) ; G({floor = 2})", f ) == Verdict::fail );
    CHECK( verdict_of( "EXISTS({floor = 2}) ; X({floor = 1})", f ) == Verdict::pass );
    CHECK( verdict_of( "EXISTS({floor = 1}) ; TRACE(inc; {floor = 2})", f ) == Verdict::pass );

    // An INV carrier is every state it checked.
    auto all = eval_vo( parse_vo( "R/M: INV({floor < 3}) ; INV({floor = 2})" ).expr, f.m, f.space );
    CHECK( all.children[ 0 ].carrier.size() == 3 );
    CHECK( all.verdict == Verdict::fail );

    auto none = eval_vo( parse_vo( "R/M: EXISTS({floor = 2}) & EXISTS({floor = 0}) ; INV({floor = 1})" ).expr, f.m,
                         f.space );
    CHECK( none.verdict == Verdict::inconclusive );
    REQUIRE( none.error.has_value() );
    CHECK( none.error->code == "E-ENG-020" );
    CHECK_FALSE( none.children[ 1 ].evaluated );
}

TEST_CASE( "Kleene connectives match the truth-order lattice" )
{
    // fail < inconclusive < pass; and = min, or = max.
    auto rank = []( Verdict v ) { return v == Verdict::fail ? 0 : v == Verdict::inconclusive ? 1 : 2; };
    for ( auto a : { Verdict::pass, Verdict::fail, Verdict::inconclusive } )
        for ( auto b : { Verdict::pass, Verdict::fail, Verdict::inconclusive } )
        {
            CHECK( rank( kleene_and( a, b ) ) == std::min( rank( a ), rank( b ) ) );
            CHECK( rank( kleene_or( a, b ) ) == std::max( rank( a ), rank( b ) ) );
            CHECK( kleene_and( a, b ) == kleene_and( b, a ) );
        }
}

TEST_CASE( "SEQ is associative on the lift" )
{
    const char* tasks[] = { "EXISTS({floor = 1})", "EXISTS({floor = 2})", "INV({floor > 0})", "TRACE(inc)",
                            "TRACE(dec)", "F({floor = 0})", "EXISTS({floor = 0})" };
    auto f = lift();
    std::mt19937 rng{ 3 };
    for ( int i = 0; i < 60; ++i )
    {
        std::string a = tasks[ rng() % 7 ], b = tasks[ rng() % 7 ], c = tasks[ rng() % 7 ];
        auto left = eval_vo( parse_vo( "R/M: (" + a + " ; " + b + ") ; " + c ).expr, f.m, f.space );
        auto right = eval_vo( parse_vo( "R/M: " + a + " ; (" + b + " ; " + c + ")" ).expr, f.m, f.space );
        CHECK_MESSAGE( left.verdict == right.verdict, std::string{ a + " ; " + b + " ; " + c } );
        CHECK_MESSAGE( left.carrier == right.carrier, std::string{ a + " ; " + b + " ; " + c } );
    }
}

TEST_CASE( "tableau checker agrees with the brute-force oracle" )
{
    std::mt19937 rng{ 2024 };
    int fails = 0;
    for ( int round = 0; round < 150; ++round )
    {
        auto m = random_machine( rng );
        auto space = specml::explore( m );
        auto text = random_formula( rng, 3 );
        auto t = task( "LTL(" + text + ")" );
        auto r = eval_task( t, m, space );
        auto expected = oracle_ltl( *t.ltl, m, space );
        CHECK_MESSAGE( r.verdict == expected, text );
        if ( r.verdict == Verdict::fail )
        {
            ++fails;
            auto bad = check_evidence( t, r, m, space );
            CHECK_MESSAGE( !bad.has_value(), std::string{ text + ": " + bad.value_or( "" ) } );
        }
    }
    // The generator must exercise both outcomes.
    CHECK( fails > 10 );
    CHECK( fails < 140 );
}

TEST_CASE( "truncated spaces give inconclusive verdicts" )
{
    auto m = test::machine( "aman/M1.mch", { "aman/C0.ctx" }, { "aman/M0.mch" } );
    auto space = specml::explore( m, 20 );
    REQUIRE( space.truncated );
    auto vo = volang::parse_vo_file( test::slurp( test::corpus( "aman/aman.vo" ) ) );
    CHECK( eval_vo( vo.obligations[ 1 ].expr, m, space ).verdict == Verdict::inconclusive );
    CHECK( eval_task( task( "G({card(dom(landing_sequence)) <= 3})" ), m, space ).verdict == Verdict::inconclusive );
    CHECK( eval_task( task( "EXISTS({card(dom(landing_sequence)) = 1})" ), m, space ).verdict == Verdict::pass );
    CHECK( test::error_code( [ & ] { oracle_ltl( parse_ltl( "G({true})" ), m, space ); } ) == "E-ENG-031" );
}
