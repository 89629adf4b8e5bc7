// Serial reference against the OpenMP kernels on a scaled AMAN schedule.

#include "vdd/specml/explore.hpp"
#include "vdd/specml/parser.hpp"

#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

using namespace vdd::specml;

namespace
{

std::string slurp( const std::string& path )
{
    std::ifstream in{ path };
    if ( !in )
        throw std::runtime_error( "cannot read " + path );
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// M1 from the corpus against a context with `planes` airplanes and slots
// 0..horizon.
CompiledMachine scaled( int planes, int horizon )
{
    std::string ctx = "context C0\nsets\n  AIRPLANE = {";
    for ( int i = 1; i <= planes; ++i )
        ctx += ( i > 1 ? ", a" : "a" ) + std::to_string( i );
    ctx += "}\nconstants\n  MAXTIME = " + std::to_string( horizon ) + "\n  AIRCRAFT_SEPARATION_MIN = 3\nend\n";
    std::vector< ContextSpec > contexts{ parse_context( ctx ) };
    std::vector< MachineSpec > machines{ parse_machine( slurp( VDD_CORPUS_DIR "/aman/M0.mch" ) ) };
    auto result = compile( parse_machine( slurp( VDD_CORPUS_DIR "/aman/M1.mch" ) ), contexts, machines );
    if ( !result.machine )
        throw std::runtime_error( "scaled M1 does not compile" );
    return std::move( *result.machine );
}

void explore_parallel( benchmark::State& state )
{
    auto m = scaled( static_cast< int >( state.range( 0 ) ), static_cast< int >( state.range( 1 ) ) );
    std::size_t states = 0;
    for ( auto _ : state )
        states = explore( m ).size();
    state.counters[ "states" ] = static_cast< double >( states );
}

void explore_reference( benchmark::State& state )
{
    auto m = scaled( static_cast< int >( state.range( 0 ) ), static_cast< int >( state.range( 1 ) ) );
    std::size_t states = 0;
    for ( auto _ : state )
        states = explore_serial( m ).size();
    state.counters[ "states" ] = static_cast< double >( states );
}

void invariants_parallel( benchmark::State& state )
{
    auto m = scaled( static_cast< int >( state.range( 0 ) ), static_cast< int >( state.range( 1 ) ) );
    auto space = explore( m );
    for ( auto _ : state )
        benchmark::DoNotOptimize( check_invariants( space, m ) );
    state.counters[ "states" ] = static_cast< double >( space.size() );
}

void invariants_reference( benchmark::State& state )
{
    auto m = scaled( static_cast< int >( state.range( 0 ) ), static_cast< int >( state.range( 1 ) ) );
    auto space = explore( m );
    for ( auto _ : state )
        benchmark::DoNotOptimize( check_invariants_serial( space, m ) );
    state.counters[ "states" ] = static_cast< double >( space.size() );
}

} // namespace

BENCHMARK( explore_parallel )->Args( { 3, 12 } )->Args( { 4, 20 } )->Unit( benchmark::kMillisecond );
BENCHMARK( explore_reference )->Args( { 3, 12 } )->Args( { 4, 20 } )->Unit( benchmark::kMillisecond );
BENCHMARK( invariants_parallel )->Args( { 3, 12 } )->Args( { 4, 20 } )->Unit( benchmark::kMillisecond );
BENCHMARK( invariants_reference )->Args( { 3, 12 } )->Args( { 4, 20 } )->Unit( benchmark::kMillisecond );

BENCHMARK_MAIN();
