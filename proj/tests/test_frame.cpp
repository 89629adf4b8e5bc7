#include "support.hpp"

#include "vdd/frame.hpp"
#include "vdd/plan.hpp"

#include <doctest.h>

#include <algorithm>

using namespace vdd;
using namespace vdd::frame;

namespace
{

struct Project
{
    ProblemFrame main;
    std::vector< ProblemFrame > subs;
};

Project load( const std::string& dir, const std::vector< std::string >& files )
{
    Project p;
    for ( const auto& f : files )
    {
        auto fr = parse_frame( test::slurp( test::corpus( dir + "/" + f ) ) );
        if ( fr.refines )
            p.subs.push_back( std::move( fr ) );
        else
            p.main = std::move( fr );
    }
    return p;
}

Choices aman_choices()
{
    Choices c;
    c[ "Schedule" ].mode = Expansion::immediate;
    c[ "Schedule" ].overrides[ "Time" ] = Expansion::deferred;
    c[ "User" ].mode = Expansion::immediate;
    return c;
}

// Counts interfaces where another endpoint produces toward `d`, straight
// from the endpoint list.
std::size_t count_incoming( const ProblemFrame& f, const std::string& d )
{
    std::size_t n = 0;
    for ( const auto& i : f.interfaces )
    {
        const Endpoint* mine = nullptr;
        bool producer = false;
        for ( const auto& e : i.endpoints )
            if ( e.domain == d )
                mine = &e;
        if ( !mine || mine->role == Role::producer )
            continue;
        for ( const auto& e : i.endpoints )
            if ( e.domain != d && e.role != Role::consumer )
                producer = true;
        n += producer ? 1 : 0;
    }
    return n;
}

} // namespace

TEST_CASE( "AMAN plan matches the golden file" )
{
    auto p = load( "aman", { "aman.frame", "schedule.frame", "user.frame" } );
    auto plan = plan::derive_plan( p.main, p.subs, aman_choices() );
    CHECK( plan::format_plan( plan ) == test::slurp( test::corpus( "aman/aman.plan" ) ) );
    CHECK( plan::parse_plan( plan::format_plan( plan ) ) == plan );
}

TEST_CASE( "lift plan matches the golden file" )
{
    auto p = load( "lift", { "lift.frame", "doors.frame" } );
    Choices c;
    c[ "Doors" ].mode = Expansion::immediate;
    auto plan = plan::derive_plan( p.main, p.subs, c );
    CHECK( plan::format_plan( plan ) == test::slurp( test::corpus( "lift/lift.plan" ) ) );
    for ( std::size_t i = 0; i < plan.steps.size(); ++i )
        CHECK_FALSE( plan::explain_step( plan, i ).empty() );
    CHECK( test::error_code( [ & ] { plan::explain_step( plan, plan.steps.size() ); } ) == "E-PLAN-003" );
}

TEST_CASE( "frame print reparses to an equal frame" )
{
    for ( const char* f : { "aman/aman.frame", "aman/schedule.frame", "aman/user.frame", "lift/lift.frame",
                            "lift/doors.frame" } )
    {
        auto fr = parse_frame( test::slurp( test::corpus( f ) ) );
        CHECK_MESSAGE( same( parse_frame( print( fr ) ), fr ), f );
    }
}

TEST_CASE( "incoming degree agrees with a direct count" )
{
    auto p = load( "aman", { "aman.frame", "schedule.frame", "user.frame" } );
    std::vector< const ProblemFrame* > frames{ &p.main };
    for ( const auto& s : p.subs )
        frames.push_back( &s );
    for ( const auto* f : frames )
        for ( const auto& d : f->domains )
            CHECK_MESSAGE( incoming_degree( *f, d.name ) == count_incoming( *f, d.name ), std::string{ f->name + "." + d.name } );
    CHECK( test::error_code( [ & ] { incoming_degree( p.main, "Nowhere" ); } ) == "E-FRAME-006" );
}

TEST_CASE( "flattening with everything immediate leaves nothing deferred" )
{
    auto p = load( "aman", { "aman.frame", "schedule.frame", "user.frame" } );
    Choices c;
    c[ "Schedule" ].mode = Expansion::immediate;
    c[ "User" ].mode = Expansion::immediate;
    auto flat = flatten( p.main, p.subs, c );
    CHECK( flat.deferred.empty() );
    CHECK( flat.frame.domain( "Time" ) != nullptr );
    CHECK( flat.frame.domain( "Zoom" ) != nullptr );
    CHECK( flat.frame.domain( "User" ) == nullptr );
}

TEST_CASE( "frame errors carry their codes" )
{
    auto p = load( "aman", { "aman.frame", "schedule.frame", "user.frame" } );

    Choices missing;
    missing[ "Schedule" ].mode = Expansion::immediate;
    auto diag = check_subframes( p.main, p.subs, missing );
    REQUIRE_FALSE( diag.empty() );
    CHECK( std::any_of( diag.begin(), diag.end(), []( const Diagnostic& d ) { return d.code == "E-FRAME-009"; } ) );

    auto given = parse_frame( "subframe X refines Display\ndomain AMAN machine\ndomain Display designed\n"
                              "domain Extra designed\ninterface e: Extra -> Display\n" );
    auto bad = parse_frame( "frame F\ndomain M machine\ndomain Display given\ninterface i: M -> Display\n" );
    diag = check_subframes( bad, std::vector< ProblemFrame >{ given }, {} );
    REQUIRE_FALSE( diag.empty() );
    CHECK( diag.front().code == "E-FRAME-002" );

    CHECK( test::error_code( [] { parse_frame( "frame F\ndomain A machine\ndomain A given\n" ); } ) == "E-FRAME-005" );
    CHECK( test::error_code( [] { parse_frame( "frame F\ndomain A machine\ninterface i: A -> B\n" ); } )
           == "E-FRAME-006" );

    auto lonely = parse_frame( "frame F\ndomain M machine\ndomain A designed\ndomain B designed\ninterface i: M -> A\n" );
    CHECK( test::error_code( [ & ] { plan::derive_plan( lonely, {}, {} ); } ) == "E-PLAN-002" );
}
