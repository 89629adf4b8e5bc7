// Acceptance harness: one line per criterion, PASS/FAIL with wall time.
// Exits non-zero when any criterion fails.

#include "support.hpp"

#include "vdd/cli.hpp"
#include "vdd/engine.hpp"
#include "vdd/volang.hpp"

#include <json.hpp>

#include <chrono>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

using namespace vdd;
namespace fs = std::filesystem;

namespace
{

struct Outcome
{
    int code = -1;
    std::string out;
    std::string err;
};

Outcome vdd_cmd( const fs::path& project, std::vector< std::string > args )
{
    args.insert( args.begin(), { "vdd", "--project", project.string() } );
    std::vector< const char* > argv;
    for ( const auto& a : args )
        argv.push_back( a.c_str() );
    std::ostringstream out, err;
    std::istringstream in;
    Outcome o;
    o.code = cli::run_cli( static_cast< int >( argv.size() ), argv.data(), out, err, in );
    o.out = out.str();
    o.err = err.str();
    return o;
}

void replace_file( const fs::path& dir, const std::string& from, const std::string& to )
{
    fs::copy_file( dir / from, dir / to, fs::copy_options::overwrite_existing );
}

// Evidence gathered by criteria 3-6 for the replay check.
struct Replay
{
    std::string origin;
    volang::Task task;
    engine::TaskResult result;
    std::shared_ptr< specml::CompiledMachine > machine;
    std::shared_ptr< specml::StateSpace > space;
};
std::vector< Replay > replays;

struct Checked
{
    engine::TaskResult result;
    engine::Verdict oracle;
};

// Evaluates an LTL task with the tableau checker and the oracle, keeping the
// evidence for criterion 10.
Checked check_ltl( const std::string& origin, const volang::Task& task, specml::CompiledMachine m )
{
    auto machine = std::make_shared< specml::CompiledMachine >( std::move( m ) );
    auto space = std::make_shared< specml::StateSpace >( specml::explore( *machine ) );
    Checked c{ engine::eval_task( task, *machine, *space ), engine::oracle_ltl( *task.ltl, *machine, *space ) };
    replays.push_back( { origin, task, c.result, machine, space } );
    return c;
}

engine::TaskResult check_task( const std::string& origin, const volang::Task& task, specml::CompiledMachine m )
{
    auto machine = std::make_shared< specml::CompiledMachine >( std::move( m ) );
    auto space = std::make_shared< specml::StateSpace >( specml::explore( *machine ) );
    auto r = engine::eval_task( task, *machine, *space );
    replays.push_back( { origin, task, r, machine, space } );
    return r;
}

volang::Task obligation_task( const std::string& file, std::size_t index )
{
    auto vo = volang::parse_vo_file( test::slurp( test::corpus( file ) ) );
    return *vo.obligations.at( index ).expr.task;
}

std::string random_formula( std::mt19937& rng, int depth )
{
    auto k = std::to_string( rng() % 5 );
    if ( depth == 0 || rng() % 4 == 0 )
    {
        switch ( rng() % 5 )
        {
        case 0:
            return "{x = " + k + "}";
        case 1:
            return "{x < " + k + "}";
        case 2:
            return "BA(x /= x$0)";
        case 3:
            return "BA(y > y$0)";
        default:
            return "{y = " + std::to_string( rng() % 3 ) + "}";
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

// x in 0..4, y in 0..2: at most 15 states.
std::string random_machine( std::mt19937& rng )
{
    std::string text = "machine R\nvariables\n  x : 0..4\n  y : 0..2\nevents\n  event INITIALISATION\n  then\n    x := "
                     + std::to_string( rng() % 5 ) + "\n    y := " + std::to_string( rng() % 3 ) + "\n  end\n";
    int count = 1 + static_cast< int >( rng() % 4 );
    for ( int i = 0; i < count; ++i )
        text += "  event e" + std::to_string( i ) + "\n  when x /= " + std::to_string( rng() % 6 ) + " & y /= "
              + std::to_string( rng() % 4 ) + "\n  then\n    x := (x + " + std::to_string( 1 + rng() % 4 )
              + ") mod 5\n    y := (y + " + std::to_string( rng() % 3 ) + ") mod 3\n  end\n";
    return text + "end\n";
}

struct Criterion
{
    int number;
    double limit_ms; // 0: no time bound
    std::function< std::pair< bool, std::string >() > body;
};

std::pair< bool, std::string > plan_aman()
{
    auto dir = test::scratch( "aman", "acc-plan-aman" );
    auto r = vdd_cmd( dir, { "plan" } );
    bool ok = r.code == 0 && r.out == test::slurp( test::corpus( "aman/aman.plan" ) );
    return { ok, ok ? "golden plan matched (" + std::to_string( std::count( r.out.begin(), r.out.end(), '\n' ) ) + " lines)"
                    : "plan differs:\n" + r.out + r.err };
}

std::pair< bool, std::string > plan_lift()
{
    auto dir = test::scratch( "lift", "acc-plan-lift" );
    auto r = vdd_cmd( dir, { "plan" } );
    auto first = r.out.substr( 0, r.out.find( '\n' ) );
    bool ok = r.code == 0 && r.out == test::slurp( test::corpus( "lift/lift.plan" ) )
           && first.find( "domains=Floors" ) != std::string::npos;
    return { ok, ok ? "golden plan matched, first step: " + first : "plan differs:\n" + r.out + r.err };
}

std::pair< bool, std::string > req1()
{
    auto dir = test::scratch( "aman", "acc-req1" );
    auto run = vdd_cmd( dir, { "run", "--vo", "REQ1/M0" } );
    auto task = obligation_task( "aman/aman.vo", 0 );
    auto base = check_ltl( "REQ1/M0", task, test::machine( "aman/M0.mch", { "aman/C0.ctx" } ) );
    auto mutant =
        check_ltl( "REQ1 remove-only", task, test::machine( "aman/variants/M0_remove_only.mch", { "aman/C0.ctx" } ) );

    // Not scored: the same implication with F in place of GF, the reading
    // under which the remove-only mutant is expected to fail.
    auto gloss = task;
    gloss.ltl = volang::parse_ltl( "F(BA(scheduledAirplanes /= scheduledAirplanes$0)) => "
                                   "F(BA({exists x . x : scheduledAirplanes & x /: scheduledAirplanes$0}))" );
    auto f_gloss = check_ltl( "REQ1 F-gloss remove-only", gloss,
                              test::machine( "aman/variants/M0_remove_only.mch", { "aman/C0.ctx" } ) );

    bool cli_pass = run.code == 0 && run.out.find( "REQ1/M0 PASS" ) != std::string::npos;
    bool base_ok = base.result.verdict == engine::Verdict::pass && base.oracle == engine::Verdict::pass;
    bool mutant_ok = mutant.result.verdict == engine::Verdict::fail && mutant.oracle == engine::Verdict::fail
                  && mutant.result.evidence.kind == engine::Evidence::Kind::lasso;
    std::string detail = "run exit " + std::to_string( run.code ) + "; M0 " + std::string{ to_string( base.result.verdict ) }
                       + " (oracle " + std::string{ to_string( base.oracle ) } + "); remove-only mutant "
                       + std::string{ to_string( mutant.result.verdict ) } + " (oracle "
                       + std::string{ to_string( mutant.oracle ) } + ", expected FAIL with lasso)"
                       + "; F-gloss on mutant " + std::string{ to_string( f_gloss.result.verdict ) } + " (oracle "
                       + std::string{ to_string( f_gloss.oracle ) } + ", not scored)";
    return { cli_pass && base_ok && mutant_ok, detail };
}

std::pair< bool, std::string > req5()
{
    auto task = obligation_task( "aman/aman.vo", 1 );
    auto ok = check_task( "REQ5/M1", task, test::machine( "aman/M1.mch", { "aman/C0.ctx" }, { "aman/M0.mch" } ) );
    auto gap = check_task( "REQ5 gap-2", task,
                           test::machine( "aman/variants/M1_gap2.mch", { "aman/C0.ctx" }, { "aman/M0.mch" } ) );

    // Oracle: the gap-2 initial map itself breaks the separation predicate.
    auto m = test::machine( "aman/variants/M1_gap2.mch", { "aman/C0.ctx" }, { "aman/M0.mch" } );
    auto init = specml::initial_steps( m );
    auto pred = specml::compile_predicate( m, *task.predicate, false );
    bool init_violates = !init.empty() && !specml::holds( pred, init.front().target );

    bool pass = ok.verdict == engine::Verdict::pass && gap.verdict == engine::Verdict::fail
             && gap.evidence.kind != engine::Evidence::Kind::none && gap.evidence.stem.empty() && init_violates;
    return { pass, "M1 " + std::string{ to_string( ok.verdict ) } + "; gap-2 " + std::string{ to_string( gap.verdict ) }
                       + " with trace length " + std::to_string( gap.evidence.stem.size() ) };
}

std::pair< bool, std::string > eq1()
{
    auto task = obligation_task( "lift/lift.vo", 0 );
    auto r = check_ltl( "REQ0/M0", task, test::machine( "lift/M0.mch" ) );
    auto dir = test::scratch( "lift", "acc-eq1" );
    vdd_cmd( dir, { "--reproducible", "run" } );
    auto report = vdd_cmd( dir, { "--reproducible", "report" } );
    bool noted = report.out.find( "REQ0/M0: the worked formula" ) != std::string::npos;
    bool pass = r.result.verdict == engine::Verdict::fail && r.oracle == engine::Verdict::fail
             && r.result.evidence.kind == engine::Evidence::Kind::lasso && noted;
    return { pass, std::string{ to_string( r.result.verdict ) } + " (oracle " + std::string{ to_string( r.oracle ) }
                       + "), lasso stem [" + std::to_string( r.result.evidence.stem.size() ) + "] cycle ["
                       + std::to_string( r.result.evidence.cycle.size() ) + "]"
                       + ( noted ? ", discrepancy note in report" : ", note missing from report" ) };
}

std::pair< bool, std::string > oracle_agreement()
{
    std::mt19937 rng{ 20260418 };
    int agree = 0, total = 0, fails = 0;
    std::size_t max_states = 0;
    std::string first_mismatch;
    for ( int i = 0; i < 100; ++i )
    {
        auto machine = test::machine_text( random_machine( rng ) );
        std::string text;
        do
            text = random_formula( rng, 4 );
        while ( volang::depth( volang::parse_ltl( text ) ) > 4 );
        auto task = *volang::parse_vo( "R/M: LTL(" + text + ")" ).expr.task;
        auto c = check_ltl( "random #" + std::to_string( i ), task, std::move( machine ) );
        max_states = std::max( max_states, replays.back().space->size() );
        ++total;
        fails += c.result.verdict == engine::Verdict::fail ? 1 : 0;
        if ( c.result.verdict == c.oracle )
            ++agree;
        else if ( first_mismatch.empty() )
            first_mismatch = text;
    }
    return { agree == total && max_states <= 15,
             std::to_string( agree ) + "/" + std::to_string( total ) + " agree (" + std::to_string( fails )
                 + " FAIL), largest space " + std::to_string( max_states ) + " states"
                 + ( first_mismatch.empty() ? "" : ", first mismatch: " + first_mismatch ) };
}

std::set< std::string > stale_set( const fs::path& dir )
{
    std::set< std::string > out;
    std::istringstream lines{ vdd_cmd( dir, { "--json", "impact" } ).out };
    for ( std::string line; std::getline( lines, line ); )
        out.insert( nlohmann::json::parse( line ).at( "vo" ).get< std::string >() );
    return out;
}

std::string join( const std::set< std::string >& s )
{
    std::string out;
    for ( const auto& x : s )
        out += ( out.empty() ? "" : ", " ) + x;
    return "{" + out + "}";
}

std::pair< bool, std::string > revalidation()
{
    auto dir = test::scratch( "aman", "acc-impact" );
    vdd_cmd( dir, { "run" } );
    auto user = test::scratch( "aman", "acc-impact-user" );
    fs::copy_file( dir / "vdd.ledger", user / "vdd.ledger" );
    replace_file( dir, "variants/M0_edited.mch", "M0.mch" );
    replace_file( user, "variants/M2_user.mch", "M2.mch" );
    auto edited = stale_set( dir );
    auto added = stale_set( user );
    std::set< std::string > expected{ "REQ1/M0", "REQ5/M1" };
    return { edited == expected && added.empty(),
             "after editing M0: " + join( edited ) + "; after adding M2 (User): " + join( added ) };
}

std::pair< bool, std::string > disciplines()
{
    auto dir = test::scratch( "aman", "acc-discipline" );
    vdd_cmd( dir, { "run" } );
    replace_file( dir, "variants/M1b_refines.mch", "M1b.mch" );
    auto strict = stale_set( dir );
    auto manifest = test::slurp( dir / "vdd.project" );
    manifest.replace( manifest.find( "= strict" ), 8, "= liberal" );
    test::write( dir / "vdd.project", manifest );
    auto liberal = stale_set( dir );
    std::set< std::string > all{ "REQ1/M0", "REQ5/M1", "REQ6/M1" };
    return { strict.empty() && liberal == all, "STRICT " + join( strict ) + ", LIBERAL " + join( liberal ) };
}

std::pair< bool, std::string > determinism()
{
    bool same = true;
    std::size_t bytes = 0;
    for ( const char* project : { "aman", "lift" } )
    {
        auto dir = test::scratch( project, std::string{ "acc-repro-" } + project );
        vdd_cmd( dir, { "--reproducible", "run" } );
        auto a = vdd_cmd( dir, { "--reproducible", "report" } );
        auto b = vdd_cmd( dir, { "--reproducible", "report" } );
        same = same && a.code == 0 && a.out == b.out && !a.out.empty();
        bytes += a.out.size();
    }
    return { same, same ? "identical reports (" + std::to_string( bytes ) + " bytes over two projects)" : "reports differ" };
}

std::pair< bool, std::string > evidence_replay()
{
    int checked = 0, mismatches = 0;
    std::string first;
    for ( const auto& r : replays )
    {
        if ( r.result.evidence.kind == engine::Evidence::Kind::none )
            continue;
        ++checked;
        if ( auto bad = engine::check_evidence( r.task, r.result, *r.machine, *r.space ) )
        {
            ++mismatches;
            if ( first.empty() )
                first = r.origin + ": " + *bad;
        }
    }
    return { mismatches == 0 && checked > 0, std::to_string( checked ) + " evidence items replayed, "
                                                 + std::to_string( mismatches ) + " mismatches"
                                                 + ( first.empty() ? "" : " (" + first + ")" ) };
}

} // namespace

int main()
{
    std::vector< Criterion > criteria{
        { 1, 1000, plan_aman },   { 2, 1000, plan_lift },     { 3, 5000, req1 },
        { 4, 5000, req5 },        { 5, 1000, eq1 },           { 6, 60000, oracle_agreement },
        { 7, 1000, revalidation }, { 8, 1000, disciplines },  { 9, 0, determinism },
        { 10, 0, evidence_replay },
    };
    int failed = 0;
    for ( const auto& c : criteria )
    {
        auto start = std::chrono::steady_clock::now();
        std::pair< bool, std::string > result;
        try
        {
            result = c.body();
        }
        catch ( const std::exception& e )
        {
            result = { false, std::string{ "exception: " } + e.what() };
        }
        double ms = std::chrono::duration< double, std::milli >( std::chrono::steady_clock::now() - start ).count();
        bool in_time = c.limit_ms == 0 || ms < c.limit_ms;
        bool pass = result.first && in_time;
        failed += pass ? 0 : 1;
        std::cout << "criterion " << c.number << ": " << ( pass ? "PASS" : "FAIL" ) << " (" << std::fixed
                  << std::setprecision( 1 ) << ms << " ms";
        if ( c.limit_ms > 0 )
            std::cout << ", limit " << c.limit_ms / 1000 << " s";
        std::cout << ") " << result.second << ( in_time ? "" : " [over time limit]" ) << "\n";
    }
    std::cout << ( 10 - failed ) << "/10 criteria pass\n";
    return failed == 0 ? 0 : 1;
}
