#pragma once

#include "vdd/specml/explore.hpp"
#include "vdd/specml/parser.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace test
{

inline std::filesystem::path corpus( const std::string& rel ) { return std::filesystem::path{ VDD_CORPUS_DIR } / rel; }

inline std::string slurp( const std::filesystem::path& p )
{
    std::ifstream in{ p };
    if ( !in )
        throw std::runtime_error( "cannot read " + p.string() );
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Compiles `machine` (a path relative to the corpus) against the given
// contexts and the other machines it may refine.
inline vdd::specml::CompiledMachine machine( const std::string& machine, const std::vector< std::string >& contexts = {},
                                             const std::vector< std::string >& others = {} )
{
    std::vector< vdd::specml::ContextSpec > ctx;
    for ( const auto& c : contexts )
        ctx.push_back( vdd::specml::parse_context( slurp( corpus( c ) ) ) );
    std::vector< vdd::specml::MachineSpec > specs;
    for ( const auto& o : others )
        specs.push_back( vdd::specml::parse_machine( slurp( corpus( o ) ) ) );
    auto spec = vdd::specml::parse_machine( slurp( corpus( machine ) ) );
    auto result = vdd::specml::compile( spec, ctx, specs );
    if ( !result.machine )
    {
        std::string msg = "compile failed:";
        for ( const auto& d : result.diagnostics )
            msg += "\n" + vdd::format( d );
        throw std::runtime_error( msg );
    }
    return std::move( *result.machine );
}

inline vdd::specml::CompiledMachine machine_text( const std::string& text, const std::vector< std::string >& contexts = {} )
{
    std::vector< vdd::specml::ContextSpec > ctx;
    for ( const auto& c : contexts )
        ctx.push_back( vdd::specml::parse_context( slurp( corpus( c ) ) ) );
    auto result = vdd::specml::compile( vdd::specml::parse_machine( text ), ctx );
    if ( !result.machine )
    {
        std::string msg = "compile failed:";
        for ( const auto& d : result.diagnostics )
            msg += "\n" + vdd::format( d );
        throw std::runtime_error( msg );
    }
    return std::move( *result.machine );
}

} // namespace test

namespace test
{

// Code of the vdd::Error thrown by `f`, or "" when nothing is thrown.
template < typename F >
std::string error_code( F&& f )
{
    try
    {
        f();
    }
    catch ( const vdd::Error& e )
    {
        return e.code();
    }
    return {};
}

} // namespace test

namespace test
{

// Fresh copy of a corpus project in a temporary directory.
inline std::filesystem::path scratch( const std::string& project, const std::string& tag )
{
    auto dir = std::filesystem::temp_directory_path() / ( "vdd-test-" + tag );
    std::filesystem::remove_all( dir );
    std::filesystem::copy( corpus( project ), dir, std::filesystem::copy_options::recursive );
    std::filesystem::remove( dir / "vdd.ledger" );
    return dir;
}

inline void write( const std::filesystem::path& p, const std::string& text )
{
    std::ofstream out{ p };
    out << text;
}

} // namespace test
