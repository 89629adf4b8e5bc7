#include "support.hpp"

#include "vdd/ledger.hpp"
#include "vdd/project.hpp"

#include <doctest.h>

#include <random>

using namespace vdd;
using namespace vdd::ledger;

namespace
{

std::set< std::string > ids( std::initializer_list< const char* > list ) { return { list.begin(), list.end() }; }

project::Project aman_with( const std::string& tag, const std::vector< std::pair< std::string, std::string > >& copies )
{
    auto dir = test::scratch( "aman", tag );
    for ( const auto& [ from, to ] : copies )
        std::filesystem::copy_file( dir / from, dir / to, std::filesystem::copy_options::overwrite_existing );
    auto p = project::load( dir );
    for ( const auto& d : p.diagnostics )
        INFO( format( d ) );
    REQUIRE_FALSE( has_errors( p.diagnostics ) );
    return p;
}

} // namespace

TEST_CASE( "SHA-256 matches the published test vector" )
{
    CHECK( sha256_hex( "abc" ) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad" );
    CHECK( sha256_hex( "" ) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855" );
}

TEST_CASE( "hashes follow the canonical print" )
{
    auto base = aman_with( "hash-base", {} );
    auto h0 = hash_project( base );

    auto dir = test::scratch( "aman", "hash-layout" );
    auto text = test::slurp( dir / "M0.mch" );
    test::write( dir / "M0.mch", "# reformatted\n\n" + text + "\n\n# trailing comment\n" );
    CHECK( hash_project( project::load( dir ) ).machines == h0.machines );

    auto renamed = text;
    renamed.replace( renamed.find( "addAirplane" ), 11, "appendPlane" );
    test::write( dir / "M0.mch", renamed );
    CHECK( hash_project( project::load( dir ) ).machines.at( "M0" ) != h0.machines.at( "M0" ) );

    auto edited = hash_project( aman_with( "hash-edit", { { "variants/M0_edited.mch", "M0.mch" } } ) );
    CHECK( edited.machines.at( "M0" ) != h0.machines.at( "M0" ) );
    CHECK( edited.machines.at( "M1" ) == h0.machines.at( "M1" ) );
    CHECK( edited.obligations == h0.obligations );
    CHECK( edited.frame == h0.frame );
}

TEST_CASE( "ledger lines round-trip" )
{
    Entry e;
    e.vo = "REQ1/M0";
    e.machine = "M0";
    e.verdict = engine::Verdict::fail;
    e.machine_hash = "aa";
    e.vo_hash = "bb";
    e.frame_hash = "cc";
    e.scope = { "Aircraft", "Schedule" };
    e.machines = { { "M0", "aa" } };
    e.domains = { { "Schedule", "dd" } };
    e.timestamp = "2026-01-01T00:00:00Z";
    auto back = from_line( to_line( e ) );
    CHECK( to_line( back ) == to_line( e ) );
    CHECK( test::error_code( [] { from_line( "{\"type\":\"result\"}" ); } ) == "E-LED-001" );
    CHECK( test::error_code( [] { from_line( "not json" ); } ) == "E-LED-001" );
}

TEST_CASE( "record refuses results against changed artifacts" )
{
    auto p = aman_with( "record", {} );
    auto h = hash_project( p );
    Ledger book;
    Entry e;
    e.vo = "REQ1/M0";
    e.machine = "M0";
    e.verdict = engine::Verdict::pass;
    e.machine_hash = h.machines.at( "M0" );
    e.vo_hash = h.obligations.at( "REQ1/M0" );
    e.frame_hash = h.frame;
    record( book, e, h );
    CHECK( book.entries().size() == 1 );
    e.machine_hash = "0000";
    CHECK( test::error_code( [ & ] { record( book, e, h ); } ) == "E-LED-003" );
    CHECK( book.entries().size() == 1 );
}

TEST_CASE( "impact on the AMAN index" )
{
    auto p = aman_with( "impact", {} );
    auto index = index_project( p );
    ImpactOptions strict;
    CHECK( impact( {}, {}, index, p.scope_frame, strict ).empty() );
    CHECK( impact( { "M0" }, {}, index, p.scope_frame, strict ) == ids( { "REQ1/M0", "REQ5/M1" } ) );
    CHECK( impact( { "M1" }, {}, index, p.scope_frame, strict ) == ids( { "REQ1/M0", "REQ5/M1", "REQ6/M1" } ) );
    CHECK( test::error_code( [ & ] { impact( { "M9" }, {}, index, p.scope_frame, strict ); } ) == "E-LED-002" );

    auto grown = aman_with( "impact-m1b", { { "variants/M1b_refines.mch", "M1b.mch" } } );
    auto gi = index_project( grown );
    CHECK( impact( { "M1b" }, { "M1b" }, gi, grown.scope_frame, strict ).empty() );
    ImpactOptions liberal{ project::Discipline::liberal, false };
    CHECK( impact( { "M1b" }, { "M1b" }, gi, grown.scope_frame, liberal ) == ids( { "REQ1/M0", "REQ5/M1", "REQ6/M1" } ) );

    auto user = aman_with( "impact-m2", { { "variants/M2_user.mch", "M2.mch" } } );
    auto ui = index_project( user );
    CHECK( impact( { "M2" }, { "M2" }, ui, user.scope_frame, strict ).empty() );
}

TEST_CASE( "impact is monotone in the changed set" )
{
    auto p = aman_with( "monotone", { { "variants/M2_user.mch", "M2.mch" }, { "variants/M1b_refines.mch", "M1b.mch" } } );
    auto index = index_project( p );
    std::vector< std::string > names{ "M0", "M1", "M1b", "M2" };
    std::mt19937 rng{ 5 };
    for ( int round = 0; round < 200; ++round )
    {
        std::set< std::string > small, added;
        for ( const auto& n : names )
        {
            if ( rng() % 2 )
                small.insert( n );
            if ( rng() % 3 == 0 )
                added.insert( n );
        }
        auto big = small;
        big.insert( names[ rng() % names.size() ] );
        std::set< std::string > small_added, big_added;
        for ( const auto& n : added )
        {
            if ( small.contains( n ) )
                small_added.insert( n );
            if ( big.contains( n ) )
                big_added.insert( n );
        }
        for ( auto mode : { project::Discipline::strict, project::Discipline::liberal } )
            for ( bool transitive : { false, true } )
            {
                ImpactOptions o{ mode, transitive };
                auto a = impact( small, small_added, index, p.scope_frame, o );
                auto b = impact( big, big_added, index, p.scope_frame, o );
                CHECK( std::includes( b.begin(), b.end(), a.begin(), a.end() ) );
            }
    }
}

TEST_CASE( "workflow stages advance one at a time" )
{
    StageEvidence none;
    auto [ s0, why0 ] = derive_stage( none );
    CHECK( s0 == Stage::selected );
    REQUIRE( why0.has_value() );
    CHECK( why0->code == "E-LED-010" );

    StageEvidence full{ true, true, true, true };
    CHECK( derive_stage( full ).first == Stage::validated );
    CHECK( test::error_code( [ & ] { advance_stage( Stage::selected, Stage::verified, full ); } ) == "E-LED-010" );
    CHECK( advance_stage( Stage::verified, Stage::validated, full ) == Stage::validated );

    // After a machine edit the old check and result no longer count.
    StageEvidence edited{ true, true, false, false };
    CHECK( derive_stage( edited ).first == Stage::implemented );
}

TEST_CASE( "manifest parsing" )
{
    auto m = project::parse_manifest( test::slurp( test::corpus( "aman/vdd.project" ) ) );
    CHECK( m.name == "aman" );
    CHECK( m.cap == 100000 );
    CHECK( m.discipline == project::Discipline::strict );
    REQUIRE( m.choices.contains( "Schedule" ) );
    CHECK( m.choices[ "Schedule" ].of( "Aircraft" ) == frame::Expansion::immediate );
    CHECK( m.choices[ "Schedule" ].of( "Time" ) == frame::Expansion::deferred );
    CHECK( m.choices[ "User" ].mode == frame::Expansion::immediate );
    CHECK( test::error_code( [] { project::parse_manifest( "colour = blue\n" ); } ) == "E-CLI-001" );
    CHECK( test::error_code( [] { project::parse_manifest( "cap = -1\n" ); } ) == "E-CLI-001" );
    CHECK( test::error_code( [] { project::parse_manifest( "choice.X = sometimes\n" ); } ) == "E-CLI-001" );
}

TEST_CASE( "an empty project has an empty matrix" )
{
    project::Project p;
    Ledger book;
    auto mx = matrix( p, book, {} );
    CHECK( mx.requirements.empty() );
    CHECK( format_csv( mx ) == "requirement\n" );
}
