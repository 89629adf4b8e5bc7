#include "support.hpp"

#include "vdd/cli.hpp"

#include <doctest.h>
#include <json.hpp>

#include <set>
#include <sstream>

namespace
{

struct Outcome
{
    int code = -1;
    std::string out;
    std::string err;
};

Outcome vdd_run( const std::filesystem::path& project, std::vector< std::string > args, const std::string& input = {} )
{
    args.insert( args.begin(), { "vdd", "--project", project.string() } );
    std::vector< const char* > argv;
    for ( const auto& a : args )
        argv.push_back( a.c_str() );
    std::ostringstream out, err;
    std::istringstream in{ input };
    Outcome o;
    o.code = vdd::cli::run_cli( static_cast< int >( argv.size() ), argv.data(), out, err, in );
    o.out = out.str();
    o.err = err.str();
    return o;
}

std::size_t count( const std::string& text, const std::string& word )
{
    std::size_t n = 0;
    for ( auto pos = text.find( word ); pos != std::string::npos; pos = text.find( word, pos + 1 ) )
        ++n;
    return n;
}

} // namespace

TEST_CASE( "plan on AMAN prints the golden plan" )
{
    auto dir = test::scratch( "aman", "cli-plan" );
    auto r = vdd_run( dir, { "plan" } );
    CHECK( r.code == 0 );
    CHECK( r.out == test::slurp( test::corpus( "aman/aman.plan" ) ) );
    CHECK( vdd_run( dir, { "plan", "--explain" } ).out.find( "Guideline" ) != std::string::npos );
}

TEST_CASE( "check: clean, malformed frame, seeded violation" )
{
    auto dir = test::scratch( "aman", "cli-check" );
    CHECK( vdd_run( dir, { "check" } ).code == 0 );

    test::write( dir / "aman.frame", test::slurp( dir / "aman.frame" ) + "domain Other machine\n" );
    auto r = vdd_run( dir, { "check" } );
    CHECK( r.code == 2 );
    CHECK( r.err.find( "E-FRAME-001" ) != std::string::npos );
    CHECK( r.err.find( "aman.frame:" ) != std::string::npos );

    dir = test::scratch( "aman", "cli-gap" );
    std::filesystem::copy_file( dir / "variants/M1_gap2.mch", dir / "M1.mch",
                                std::filesystem::copy_options::overwrite_existing );
    r = vdd_run( dir, { "check" } );
    CHECK( r.code == 3 );
    CHECK( r.err.find( "inv2" ) != std::string::npos );
}

TEST_CASE( "run records a PASS and the matrix shows it" )
{
    auto dir = test::scratch( "aman", "cli-run" );
    auto r = vdd_run( dir, { "run", "--vo", "REQ1/M0" } );
    CHECK( r.code == 0 );
    CHECK( r.out.find( "REQ1/M0 PASS" ) != std::string::npos );
    auto csv = vdd_run( dir, { "report", "--csv" } ).out;
    CHECK( csv.find( "REQ1,PASS,-" ) != std::string::npos );
    CHECK( vdd_run( dir, { "run", "--vo", "REQ9/M0" } ).code == 1 );
}

TEST_CASE( "run with one failing obligation exits 4" )
{
    auto dir = test::scratch( "aman", "cli-fail" );
    test::write( dir / "extra.vo", "REQ7/M0: EXISTS({card(scheduledAirplanes) = 4})\n" );
    auto r = vdd_run( dir, { "run", "--all" } );
    CHECK( r.code == 4 );
    auto csv = vdd_run( dir, { "report", "--csv" } ).out;
    CHECK( count( csv, "FAIL" ) == 1 );
    CHECK( count( csv, "PASS" ) == 3 );
}

TEST_CASE( "run never records when the invariant check fails" )
{
    auto dir = test::scratch( "aman", "cli-norecord" );
    std::filesystem::copy_file( dir / "variants/M1_gap2.mch", dir / "M1.mch",
                                std::filesystem::copy_options::overwrite_existing );
    auto r = vdd_run( dir, { "run" } );
    CHECK( r.code == 4 );
    CHECK( r.out.find( "REQ5/M1 FAIL" ) != std::string::npos );
    CHECK( r.out.find( "trace [] ->" ) != std::string::npos );
    CHECK_FALSE( std::filesystem::exists( dir / "vdd.ledger" ) );
}

TEST_CASE( "impact after editing the Schedule machine and adding a User machine" )
{
    auto dir = test::scratch( "aman", "cli-impact" );
    REQUIRE( vdd_run( dir, { "run" } ).code == 0 );
    CHECK( vdd_run( dir, { "impact" } ).out == "no stale obligations\n" );

    auto user = test::scratch( "aman", "cli-impact-user" );
    std::filesystem::copy_file( dir / "vdd.ledger", user / "vdd.ledger" );
    std::filesystem::copy_file( user / "variants/M2_user.mch", user / "M2.mch" );
    CHECK( vdd_run( user, { "impact" } ).out == "no stale obligations\n" );

    std::filesystem::copy_file( dir / "variants/M0_edited.mch", dir / "M0.mch",
                                std::filesystem::copy_options::overwrite_existing );
    auto r = vdd_run( dir, { "--json", "impact" } );
    std::set< std::string > stale;
    std::istringstream lines{ r.out };
    for ( std::string line; std::getline( lines, line ); )
        stale.insert( nlohmann::json::parse( line ).at( "vo" ).get< std::string >() );
    CHECK( stale == std::set< std::string >{ "REQ1/M0", "REQ5/M1" } );
    CHECK( vdd_run( dir, { "report", "--csv" } ).out.find( "REQ1,STALE" ) != std::string::npos );
}

TEST_CASE( "status walks the workflow and resets on machine edits" )
{
    auto dir = test::scratch( "aman", "cli-status" );
    CHECK( vdd_run( dir, { "status" } ).out.find( "REQ1  M0  IMPLEMENTED" ) != std::string::npos );
    REQUIRE( vdd_run( dir, { "run" } ).code == 0 );
    auto s = vdd_run( dir, { "status" } ).out;
    CHECK( s.find( "REQ1  M0  VALIDATED" ) != std::string::npos );
    CHECK( s.find( "REQ7  -  SELECTED" ) != std::string::npos );
    std::filesystem::copy_file( dir / "variants/M0_edited.mch", dir / "M0.mch",
                                std::filesystem::copy_options::overwrite_existing );
    CHECK( vdd_run( dir, { "status" } ).out.find( "REQ1  M0  IMPLEMENTED" ) != std::string::npos );
}

TEST_CASE( "reproducible reports are byte-identical" )
{
    auto dir = test::scratch( "lift", "cli-repro" );
    vdd_run( dir, { "--reproducible", "run" } );
    auto a = vdd_run( dir, { "--reproducible", "report" } );
    auto b = vdd_run( dir, { "--reproducible", "report" } );
    CHECK( a.code == 0 );
    CHECK( a.out == b.out );
    CHECK( a.out.find( "REQ0/M0: the worked formula" ) != std::string::npos );
}

TEST_CASE( "animate the lift and replay a saved trace" )
{
    auto dir = test::scratch( "lift", "cli-animate" );
    auto trace = ( dir / "s1.trace" ).string();
    auto r = vdd_run( dir, { "animate", "M0" }, "1\n1\nsave " + trace + "\nquit\n" );
    CHECK( r.code == 0 );
    CHECK( r.out.find( "state: floor=2" ) != std::string::npos );

    auto reset = vdd_run( dir, { "animate", "M0" }, "reset\n" );
    CHECK( count( reset.out, "state: floor=0" ) == 2 );
    CHECK( vdd_run( dir, { "animate", "M0" }, "7\nfoo\n" ).out.find( "invalid selection" ) != std::string::npos );

    auto saved = test::slurp( trace );
    CHECK( saved == "TRACE(inc; inc)\n" );
    test::write( dir / "saved.vo", "REQ2/M0: " + saved );
    test::write( dir / "lift.vo", "" );
    auto run = vdd_run( dir, { "run", "--vo", "REQ2/M0" } );
    CHECK( run.code == 0 );
    CHECK( run.out.find( "REQ2/M0 PASS" ) != std::string::npos );
}

TEST_CASE( "init, export-space and usage errors" )
{
    auto dir = std::filesystem::temp_directory_path() / "vdd-test-init";
    std::filesystem::remove_all( dir );
    CHECK( vdd_run( dir, { "init" } ).code == 0 );
    CHECK( std::filesystem::exists( dir / "vdd.project" ) );
    CHECK( vdd_run( dir, { "init" } ).code == 1 );

    auto lift = test::scratch( "lift", "cli-export" );
    auto r = vdd_run( lift, { "export-space", "M0" } );
    CHECK( r.code == 0 );
    CHECK( count( r.out, "\n" ) == 3 + 4 + 1 ); // states, transitions, summary
    CHECK( vdd_run( lift, { "export-space", "M9" } ).code == 1 );
    CHECK( vdd_run( lift, { "frobnicate" } ).code == 1 );
    CHECK( vdd_run( std::filesystem::temp_directory_path() / "vdd-test-none", { "check" } ).code == 1 );
}
