#include "vdd/cli.hpp"

#include "vdd/engine.hpp"
#include "vdd/ledger.hpp"
#include "vdd/plan.hpp"
#include "vdd/project.hpp"
#include "vdd/specml/explore.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

namespace vdd::cli
{

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

struct Options
{
    fs::path project = ".";
    bool reproducible = false;
    bool json = false;
    bool transitive = false;
};

struct MachineCheck
{
    std::string machine;
    specml::StateSpace space;
    std::vector< specml::Violation > violations;
    std::optional< Diagnostic > error; // evaluation error while exploring
    engine::Verdict verdict = engine::Verdict::pass;
};

std::string now_utc()
{
    auto t = std::chrono::system_clock::to_time_t( std::chrono::system_clock::now() );
    std::tm tm{};
    gmtime_r( &t, &tm );
    char buf[ 32 ];
    std::strftime( buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm );
    return buf;
}

class Session
{
    Options _opt;
    std::ostream& _out;
    std::ostream& _err;
    std::istream& _in;

public:
    Session( Options opt, std::ostream& out, std::ostream& err, std::istream& in )
        : _opt{ std::move( opt ) }, _out{ out }, _err{ err }, _in{ in }
    {
    }

    int init();
    int check();
    int plan( bool explain );
    int run( const std::vector< std::string >& ids );
    int impact();
    int status();
    int report( bool csv );
    int animate( const std::string& machine );
    int export_space( const std::string& machine );

private:
    void emit( const json& j ) { _out << j.dump() << "\n"; }
    void diagnose( const Diagnostic& d ) { _err << format( d ) << "\n"; }
    std::string stamp() const { return _opt.reproducible ? std::string{} : now_utc(); }

    ledger::ImpactOptions impact_options( const project::Project& p ) const
    {
        return { p.manifest.discipline, _opt.transitive };
    }

    // nullopt with `code` set when the project cannot be used at all.
    std::optional< project::Project > load( int& code )
    {
        try
        {
            auto p = project::load( _opt.project );
            for ( const auto& d : p.diagnostics )
                diagnose( d );
            if ( has_errors( p.diagnostics ) )
            {
                code = exit_invalid;
                return std::nullopt;
            }
            return p;
        }
        catch ( const Error& e )
        {
            diagnose( e.diagnostic() );
            code = e.code() == "E-CLI-002" ? exit_io : exit_invalid;
            return std::nullopt;
        }
    }

    ledger::Ledger open_ledger( const project::Project& p ) { return ledger::Ledger::open( p.root / "vdd.ledger" ); }

    std::vector< MachineCheck > verify( const project::Project& p );
    void report_checks( const project::Project& p, const std::vector< MachineCheck >& checks, bool summary = true );
};

std::vector< MachineCheck > Session::verify( const project::Project& p )
{
    std::vector< MachineCheck > out;
    for ( const auto& [ name, m ] : p.compiled )
    {
        MachineCheck c;
        c.machine = name;
        try
        {
            c.space = specml::explore( m, p.manifest.cap );
            c.violations = specml::check_invariants( c.space, m );
        }
        catch ( const Error& e )
        {
            c.error = e.diagnostic();
        }
        c.verdict = c.error || !c.violations.empty() ? engine::Verdict::fail
                  : c.space.truncated                ? engine::Verdict::inconclusive
                                                     : engine::Verdict::pass;
        out.push_back( std::move( c ) );
    }
    return out;
}

void Session::report_checks( const project::Project& p, const std::vector< MachineCheck >& checks, bool summary )
{
    for ( const auto& c : checks )
    {
        const auto& m = p.compiled.at( c.machine );
        std::string file;
        for ( const auto& s : p.machines )
            if ( s.value.name == c.machine )
                file = s.file;
        if ( c.error )
        {
            auto d = *c.error;
            d.file = file;
            diagnose( d );
        }
        for ( const auto& v : c.violations )
        {
            Span span;
            for ( const auto& inv : p.machine( c.machine )->invariants )
                if ( inv.label == v.label )
                    span = inv.span;
            auto trace = engine::format_steps( m, c.space, v.trace );
            auto d = make_error( "E-INV-001",
                                 c.machine + ": invariant " + v.label + " violated in state "
                                     + m.format_state( c.space.states[ v.state ] ) + " after ["
                                     + ( trace.empty() ? "INITIALISATION" : "INITIALISATION, " + trace ) + "]",
                                 span );
            d.file = file;
            diagnose( d );
        }
        if ( c.space.truncated )
            _err << file << ": warning W-EXP-001: state space of " << c.machine << " truncated at " << c.space.cap
                 << " states; results are partial\n";
        if ( !summary )
            continue;
        if ( _opt.json )
            emit( { { "type", "check" },
                    { "machine", c.machine },
                    { "states", c.space.size() },
                    { "transitions", c.space.transitions.size() },
                    { "truncated", c.space.truncated },
                    { "violations", c.violations.size() },
                    { "verdict", engine::to_string( c.verdict ) } } );
        else
            _out << c.machine << ": " << c.space.size() << " states, " << c.space.transitions.size()
                 << " transitions, invariants " << engine::to_string( c.verdict ) << "\n";
    }
}

int Session::init()
{
    auto manifest = _opt.project / "vdd.project";
    std::error_code ec;
    fs::create_directories( _opt.project, ec );
    if ( fs::exists( manifest ) )
    {
        diagnose( make_error( "E-CLI-005", manifest.string() + " already exists" ) );
        return exit_io;
    }
    std::ofstream out{ manifest };
    auto name = fs::absolute( _opt.project ).lexically_normal().filename().string();
    if ( name.empty() )
        name = fs::absolute( _opt.project ).parent_path().filename().string();
    out << "name = " << name << "\n"
        << "frames = *.frame\nrequirements = *.req\nobligations = *.vo\nmachines = *.mch\ncontexts = *.ctx\n"
        << "cap = 100000\nrefinement_discipline = strict\n";
    if ( !out )
    {
        diagnose( make_error( "E-CLI-002", "cannot write " + manifest.string() ) );
        return exit_io;
    }
    _out << "created " << manifest.string() << "\n";
    return exit_ok;
}

int Session::check()
{
    int code = exit_ok;
    auto p = load( code );
    if ( !p )
        return code;
    auto checks = verify( *p );
    report_checks( *p, checks );
    auto hashes = ledger::hash_project( *p );
    auto book = open_ledger( *p );
    bool clean = true;
    for ( const auto& c : checks )
    {
        clean = clean && c.verdict != engine::Verdict::fail;
        ledger::Entry e;
        e.type = ledger::Entry::Type::check;
        e.machine = c.machine;
        e.verdict = c.verdict;
        e.machine_hash = hashes.machines.at( c.machine );
        e.timestamp = stamp();
        ledger::record( book, e, hashes );
    }
    return clean ? exit_ok : exit_unsound;
}

int Session::plan( bool explain )
{
    int code = exit_ok;
    std::optional< project::Project > p;
    try
    {
        p = project::load( _opt.project );
    }
    catch ( const Error& e )
    {
        diagnose( e.diagnostic() );
        return e.code() == "E-CLI-002" ? exit_io : exit_invalid;
    }
    // Only frame problems stop a plan; machines may not exist yet.
    bool bad = false;
    for ( const auto& d : p->diagnostics )
        if ( d.file.ends_with( ".frame" ) || d.file == "vdd.project" || d.code.starts_with( "E-FRAME" )
             || d.code == "E-CLI-003" )
        {
            diagnose( d );
            bad = bad || d.severity == Severity::error;
        }
    if ( bad || !p->main )
    {
        if ( !p->main )
            diagnose( make_error( "E-CLI-003", "no main frame" ) );
        return exit_invalid;
    }
    try
    {
        auto plan = plan::derive_plan( *p->main, p->subs, p->manifest.choices );
        if ( _opt.json )
        {
            for ( std::size_t i = 0; i < plan.steps.size(); ++i )
            {
                const auto& s = plan.steps[ i ];
                emit( { { "index", i },
                        { "kind", plan::to_string( s.kind ) },
                        { "machine", s.machine_slot },
                        { "guidelines", s.justification },
                        { "domains", s.domains } } );
            }
            for ( const auto& d : plan.deferred )
                emit( { { "deferred", d.domain }, { "subframe", d.subframe }, { "domains", d.domains } } );
        }
        else
        {
            _out << plan::format_plan( plan );
            if ( explain )
                for ( std::size_t i = 0; i < plan.steps.size(); ++i )
                    _out << "\n" << plan::explain_step( plan, i ) << "\n";
        }
    }
    catch ( const Error& e )
    {
        diagnose( e.diagnostic() );
        code = exit_invalid;
    }
    return code;
}

int Session::run( const std::vector< std::string >& ids )
{
    int code = exit_ok;
    auto p = load( code );
    if ( !p )
        return code;

    std::vector< const volang::ValidationObligation* > selected;
    if ( ids.empty() )
        selected = p->all_obligations();
    for ( const auto& id : ids )
    {
        const auto* vo = p->obligation( id );
        if ( !vo )
        {
            diagnose( make_error( "E-CLI-004", "no obligation " + id ) );
            return exit_io;
        }
        selected.push_back( vo );
    }

    auto checks = verify( *p );
    bool clean = true;
    for ( const auto& c : checks )
        clean = clean && c.verdict != engine::Verdict::fail;
    if ( !clean )
        report_checks( *p, checks, false );

    auto hashes = ledger::hash_project( *p );
    auto book = open_ledger( *p );
    bool failed = false;
    std::map< std::string, const MachineCheck* > by_machine;
    for ( const auto& c : checks )
        by_machine[ c.machine ] = &c;

    for ( const auto* vo : selected )
    {
        const auto& m = p->compiled.at( vo->id.model );
        const auto& check = *by_machine.at( vo->id.model );
        auto result = engine::eval_vo( vo->expr, m, check.space );
        failed = failed || result.verdict == engine::Verdict::fail;

        std::vector< std::pair< std::string, engine::NodeResult > > leaves;
        std::function< void( const volang::VOExpr&, const engine::NodeResult& ) > walk =
            [ & ]( const volang::VOExpr& e, const engine::NodeResult& r ) {
                if ( e.kind == volang::NodeKind::task )
                    leaves.emplace_back( volang::print( *e.task ), r );
                else
                    for ( std::size_t i = 0; i < e.children.size(); ++i )
                        walk( e.children[ i ], r.children[ i ] );
            };
        walk( vo->expr, result );

        std::vector< std::string > notes;
        for ( const auto& f : p->obligations )
            for ( const auto& n : f.value.notes )
                if ( n.id == vo->id )
                    notes.push_back( n.text );

        if ( _opt.json )
        {
            json tasks = json::array();
            for ( const auto& [ text, r ] : leaves )
            {
                json t{ { "task", text },
                        { "verdict", r.evaluated ? engine::to_string( r.verdict ) : "SKIPPED" } };
                if ( r.task && r.task->evidence.kind != engine::Evidence::Kind::none )
                    t[ "evidence" ] = engine::format_evidence( m, check.space, r.task->evidence );
                if ( r.task && r.task->error )
                    t[ "error" ] = format( *r.task->error );
                tasks.push_back( t );
            }
            json j{ { "vo", vo->id.str() },
                    { "verdict", engine::to_string( result.verdict ) },
                    { "tasks", tasks },
                    { "recorded", clean } };
            if ( result.error )
                j[ "error" ] = format( *result.error );
            if ( !notes.empty() )
                j[ "notes" ] = notes;
            emit( j );
        }
        else
        {
            _out << vo->id.str() << " " << engine::to_string( result.verdict ) << "\n";
            for ( const auto& [ text, r ] : leaves )
            {
                if ( leaves.size() > 1 )
                    _out << "  " << text << ": " << ( r.evaluated ? engine::to_string( r.verdict ) : "SKIPPED" )
                         << "\n";
                if ( !r.task )
                    continue;
                if ( r.task->evidence.kind != engine::Evidence::Kind::none )
                    _out << "    " << ( r.verdict == engine::Verdict::pass ? "witness " : "counterexample " )
                         << engine::format_evidence( m, check.space, r.task->evidence ) << "\n";
                if ( r.task->error )
                    _out << "    " << format( *r.task->error ) << "\n";
                else if ( !r.task->detail.empty() && r.verdict == engine::Verdict::inconclusive )
                    _out << "    " << r.task->detail << "\n";
            }
            if ( result.error )
                _out << "  " << format( *result.error ) << "\n";
            for ( const auto& n : notes )
                _out << "  note: " << n << "\n";
        }

        if ( clean )
        {
            ledger::Entry e;
            e.vo = vo->id.str();
            e.machine = vo->id.model;
            e.verdict = result.verdict;
            e.machine_hash = hashes.machines.at( e.machine );
            e.vo_hash = hashes.obligations.at( e.vo );
            e.frame_hash = hashes.frame;
            e.scope = volang::scope_of( *vo );
            e.machines = hashes.machines;
            e.domains = hashes.domains;
            e.timestamp = stamp();
            ledger::record( book, e, hashes );
        }
    }

    if ( clean )
        for ( const auto& c : checks )
        {
            ledger::Entry e;
            e.type = ledger::Entry::Type::check;
            e.machine = c.machine;
            e.verdict = c.verdict;
            e.machine_hash = hashes.machines.at( c.machine );
            e.timestamp = stamp();
            ledger::record( book, e, hashes );
        }
    else
        _err << "results not recorded: the invariant check fails (see vdd check)\n";

    if ( failed )
        return exit_failed;
    return clean ? exit_ok : exit_unsound;
}

int Session::impact()
{
    int code = exit_ok;
    auto p = load( code );
    if ( !p )
        return code;
    auto book = open_ledger( *p );
    auto stale = ledger::stale_results( *p, ledger::hash_project( *p ), book, impact_options( *p ) );
    for ( const auto& id : stale.stale )
    {
        if ( _opt.json )
            emit( { { "vo", id }, { "reason", stale.why.at( id ) } } );
        else
            _out << id << "  " << stale.why.at( id ) << "\n";
    }
    if ( stale.stale.empty() && !_opt.json )
        _out << "no stale obligations\n";
    return exit_ok;
}

int Session::status()
{
    int code = exit_ok;
    auto p = load( code );
    if ( !p )
        return code;
    auto book = open_ledger( *p );
    auto hashes = ledger::hash_project( *p );
    auto stale = ledger::stale_results( *p, hashes, book, impact_options( *p ) );
    for ( const auto& req : p->requirement_ids() )
    {
        std::vector< std::string > models;
        for ( const auto* vo : p->all_obligations() )
            if ( vo->id.requirement == req )
                models.push_back( vo->id.model );
        if ( models.empty() )
            models.push_back( "-" );
        for ( const auto& model : models )
        {
            auto ev = ledger::evidence_for( *p, hashes, book, stale, req, model );
            auto [ stage, why ] = ledger::derive_stage( ev );
            if ( _opt.json )
            {
                json j{ { "requirement", req }, { "machine", model }, { "stage", ledger::to_string( stage ) } };
                if ( why )
                    j[ "next" ] = why->message;
                emit( j );
            }
            else
            {
                _out << req << "  " << model << "  " << ledger::to_string( stage );
                if ( why )
                    _out << "  (" << why->message << ")";
                _out << "\n";
            }
        }
    }
    return exit_ok;
}

int Session::report( bool csv )
{
    int code = exit_ok;
    auto p = load( code );
    if ( !p )
        return code;
    auto book = open_ledger( *p );
    auto stale = ledger::stale_results( *p, ledger::hash_project( *p ), book, impact_options( *p ) );
    auto mx = ledger::matrix( *p, book, stale );
    if ( _opt.json )
    {
        for ( const auto& r : mx.requirements )
        {
            json row{ { "requirement", r } };
            for ( const auto& m : mx.machines )
                row[ m ] = mx.cell( r, m );
            emit( row );
        }
        return exit_ok;
    }
    if ( csv )
    {
        _out << ledger::format_csv( mx );
        return exit_ok;
    }
    if ( !_opt.reproducible )
        _out << "generated " << now_utc() << "\n\n";
    _out << ledger::format_table( mx );
    if ( !stale.stale.empty() )
    {
        _out << "\nstale:\n";
        for ( const auto& id : stale.stale )
            _out << "  " << id << "  " << stale.why.at( id ) << "\n";
    }
    bool header = false;
    for ( const auto& f : p->obligations )
        for ( const auto& n : f.value.notes )
        {
            if ( !header )
                _out << "\nnotes:\n";
            header = true;
            _out << "  " << n.id.str() << ": " << n.text << "\n";
        }
    return exit_ok;
}

int Session::animate( const std::string& name )
{
    int code = exit_ok;
    auto p = load( code );
    if ( !p )
        return code;
    auto it = p->compiled.find( name );
    if ( it == p->compiled.end() )
    {
        diagnose( make_error( "E-CLI-006", "no machine " + name ) );
        return exit_io;
    }
    const auto& m = it->second;

    struct Moment
    {
        specml::State state;
        std::string step; // text of the step that led here
    };
    std::vector< Moment > history;
    std::vector< specml::Step > options;

    auto show = [ & ] {
        if ( history.empty() )
        {
            _out << "state: (before INITIALISATION)\n";
            options = specml::initial_steps( m );
            for ( std::size_t i = 0; i < options.size(); ++i )
                _out << "  " << i + 1 << " INITIALISATION -> " << m.format_state( options[ i ].target ) << "\n";
        }
        else
        {
            _out << "state: " << m.format_state( history.back().state ) << "\n";
            options = specml::successors( m, history.back().state );
            for ( std::size_t i = 0; i < options.size(); ++i )
                _out << "  " << i + 1 << " "
                     << engine::step_text( m, m.events[ options[ i ].event ], options[ i ].binding ) << "\n";
            if ( options.empty() )
                _out << "  (deadlock)\n";
        }
        _out << "> " << std::flush;
    };
    auto start = [ & ] {
        history.clear();
        auto init = specml::initial_steps( m );
        if ( init.size() == 1 )
            history.push_back( { init.front().target, {} } );
    };

    try
    {
        start();
        show();
        std::string line;
        while ( std::getline( _in, line ) )
        {
            std::istringstream words{ line };
            std::string cmd;
            words >> cmd;
            if ( cmd.empty() )
            {
            }
            else if ( cmd == "quit" || cmd == "q" )
                break;
            else if ( cmd == "undo" )
            {
                std::size_t floor = specml::initial_steps( m ).size() == 1 ? 1 : 0;
                if ( history.size() > floor )
                    history.pop_back();
                else
                    _out << "nothing to undo\n";
            }
            else if ( cmd == "reset" )
                start();
            else if ( cmd == "save" )
            {
                std::string file;
                words >> file;
                if ( file.empty() )
                    _out << "usage: save <file>\n";
                else
                {
                    std::string text;
                    for ( std::size_t i = 1; i < history.size(); ++i )
                        text += ( text.empty() ? "" : "; " ) + history[ i ].step;
                    std::ofstream out{ file };
                    out << "TRACE(" << text << ")\n";
                    if ( out )
                        _out << "saved " << history.size() - std::min< std::size_t >( history.size(), 1 )
                             << " steps to " << file << "\n";
                    else
                        _out << "cannot write " << file << "\n";
                }
            }
            else if ( cmd == "help" )
                _out << "<number> take a step, undo, reset, save <file>, quit\n";
            else
            {
                std::size_t pick = 0;
                auto [ ptr, ec ] = std::from_chars( cmd.data(), cmd.data() + cmd.size(), pick );
                if ( ec != std::errc{} || ptr != cmd.data() + cmd.size() || pick == 0 || pick > options.size() )
                    _out << "invalid selection\n";
                else
                {
                    const auto& o = options[ pick - 1 ];
                    history.push_back( { o.target, history.empty() ? std::string{}
                                                                   : engine::step_text( m, m.events[ o.event ],
                                                                                        o.binding ) } );
                }
            }
            show();
        }
    }
    catch ( const Error& e )
    {
        diagnose( e.diagnostic() );
        return exit_unsound;
    }
    _out << "\n";
    return exit_ok;
}

int Session::export_space( const std::string& name )
{
    int code = exit_ok;
    auto p = load( code );
    if ( !p )
        return code;
    auto it = p->compiled.find( name );
    if ( it == p->compiled.end() )
    {
        diagnose( make_error( "E-CLI-006", "no machine " + name ) );
        return exit_io;
    }
    try
    {
        auto space = specml::explore( it->second, p->manifest.cap );
        specml::export_space( _out, space, it->second );
    }
    catch ( const Error& e )
    {
        diagnose( e.diagnostic() );
        return exit_unsound;
    }
    return exit_ok;
}

} // namespace

int run_cli( int argc, const char* const* argv, std::ostream& out, std::ostream& err, std::istream& in )
{
    CLI::App app{ "Validation-driven development of formal models" };
    app.name( "vdd" );
    app.require_subcommand( 1, 1 );
    app.fallthrough();

    Options opt;
    std::string project = ".";
    app.add_option( "--project", project, "Project directory (holds vdd.project)" );
    app.add_flag( "--reproducible", opt.reproducible, "Suppress timestamps" );
    app.add_flag( "--json", opt.json, "One JSON object per line on stdout" );
    app.add_flag( "--transitive-impact", opt.transitive, "Follow consumer chains past one interface" );

    auto* init = app.add_subcommand( "init", "Create vdd.project" );
    auto* check = app.add_subcommand( "check", "Frames, parse, typecheck and invariant check" );
    auto* plan = app.add_subcommand( "plan", "Derive the refinement plan" );
    bool explain = false;
    plan->add_flag( "--explain", explain, "Explain each step" );
    auto* run = app.add_subcommand( "run", "Evaluate obligations and record results" );
    std::vector< std::string > ids;
    bool all = false;
    run->add_option( "--vo", ids, "Obligation id, REQ/MACHINE" );
    run->add_flag( "--all", all, "Every obligation (the default)" );
    auto* impact = app.add_subcommand( "impact", "List obligations whose results went stale" );
    auto* status = app.add_subcommand( "status", "Workflow stage per requirement" );
    auto* report = app.add_subcommand( "report", "Traceability matrix" );
    bool csv = false;
    report->add_flag( "--csv", csv, "CSV instead of a table" );
    std::string machine;
    auto* animate = app.add_subcommand( "animate", "Step through a machine interactively" );
    animate->add_option( "machine", machine, "Machine name" )->required();
    auto* exporter = app.add_subcommand( "export-space", "Dump the reachable state space as JSON lines" );
    exporter->add_option( "machine", machine, "Machine name" )->required();

    try
    {
        app.parse( argc, argv );
    }
    catch ( const CLI::ParseError& e )
    {
        return app.exit( e, out, err ) == 0 ? exit_ok : exit_io;
    }
    opt.project = project;
    if ( all )
        ids.clear();

    Session s{ opt, out, err, in };
    try
    {
        if ( init->parsed() )
            return s.init();
        if ( check->parsed() )
            return s.check();
        if ( plan->parsed() )
            return s.plan( explain );
        if ( run->parsed() )
            return s.run( ids );
        if ( impact->parsed() )
            return s.impact();
        if ( status->parsed() )
            return s.status();
        if ( report->parsed() )
            return s.report( csv );
        if ( animate->parsed() )
            return s.animate( machine );
        if ( exporter->parsed() )
            return s.export_space( machine );
    }
    catch ( const Error& e )
    {
        err << format( e.diagnostic() ) << "\n";
        return exit_io;
    }
    catch ( const std::exception& e )
    {
        err << "error: " << e.what() << "\n";
        return exit_io;
    }
    return exit_io;
}

} // namespace vdd::cli
