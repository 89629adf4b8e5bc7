#include "vdd/plan.hpp"

#include "vdd/lexer.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace vdd::plan
{

using frame::Expansion;
using frame::ProblemFrame;

namespace
{

std::string join( const std::vector< std::string >& items, std::string_view sep = "," )
{
    std::string out;
    for ( std::size_t i = 0; i < items.size(); ++i )
    {
        if ( i )
            out += sep;
        out += items[ i ];
    }
    return out;
}

std::vector< std::string > split( std::string_view text, char sep )
{
    std::vector< std::string > out;
    std::size_t start = 0;
    while ( start <= text.size() )
    {
        auto end = text.find( sep, start );
        if ( end == std::string_view::npos )
            end = text.size();
        if ( end > start )
            out.emplace_back( text.substr( start, end - start ) );
        start = end + 1;
    }
    return out;
}

// A sub-frame depends on another when it details one of that sub-frame's
// own domains; any cycle makes the expansion order undefined.
void reject_cycles( const ProblemFrame& main, std::span< const ProblemFrame > subs )
{
    std::size_t n = subs.size();
    std::vector< std::vector< std::size_t > > edges( n );
    for ( std::size_t a = 0; a < n; ++a )
        for ( std::size_t b = 0; b < n; ++b )
            if ( a != b && subs[ a ].refines && !main.domain( *subs[ a ].refines )
                 && subs[ b ].domain( *subs[ a ].refines ) )
                edges[ a ].push_back( b );
    std::vector< int > colour( n, 0 );
    std::function< void( std::size_t ) > visit = [ & ]( std::size_t v ) {
        colour[ v ] = 1;
        for ( auto w : edges[ v ] )
        {
            if ( colour[ w ] == 1 )
                throw Error( "E-PLAN-001", "sub-frames '" + subs[ v ].name + "' and '" + subs[ w ].name
                                               + "' detail each other's domains; expansion order is cyclic" );
            if ( colour[ w ] == 0 )
                visit( w );
        }
        colour[ v ] = 2;
    };
    for ( std::size_t v = 0; v < n; ++v )
        if ( colour[ v ] == 0 )
            visit( v );
}

class Planner
{
    const ProblemFrame& _main;
    std::span< const ProblemFrame > _subs;
    const frame::Choices& _choices;
    ProblemFrame _all;
    std::string _machine;
    std::set< std::string > _introduced;
    RefinementPlan _plan;
    std::vector< RefinementStep > _tail;

public:
    Planner( const ProblemFrame& main, std::span< const ProblemFrame > subs, const frame::Choices& choices )
        : _main{ main }, _subs{ subs }, _choices{ choices }, _all{ frame::union_frame( main, subs ) }
    {
    }

    RefinementPlan run()
    {
        auto machines = _main.machines();
        if ( machines.size() != 1 )
            throw Error( "E-FRAME-001", "frame '" + _main.name + "' needs exactly one machine domain" );
        _machine = machines.front();
        _plan.frame = _main.name;
        _plan.machine = _machine;

        std::vector< std::string > adjacent;
        std::vector< std::string > remote;
        for ( const auto& d : _main.domains )
        {
            if ( d.name == _machine )
                continue;
            bool connected = std::any_of( _main.interfaces.begin(), _main.interfaces.end(),
                                          [ & ]( const frame::Interface& i ) { return i.endpoint( d.name ); } );
            if ( !connected )
                throw Error( "E-PLAN-002", "domain '" + d.name + "' has no interfaces and cannot be planned", d.span );
            ( frame::share_interface( _main, d.name, _machine ) ? adjacent : remote ).push_back( d.name );
        }
        auto by_degree = [ & ]( const std::string& a, const std::string& b ) {
            auto da = frame::incoming_degree( _main, a );
            auto db = frame::incoming_degree( _main, b );
            return da != db ? da > db : a < b;
        };
        std::sort( adjacent.begin(), adjacent.end(), by_degree );
        std::sort( remote.begin(), remote.end(), by_degree );

        std::vector< std::pair< std::string, std::size_t > > adjacent_degrees;
        for ( const auto& d : adjacent )
            adjacent_degrees.emplace_back( d, frame::incoming_degree( _main, d ) );

        for ( const auto& d : adjacent )
            domain_steps( d, false, adjacent_degrees );

        auto groups = isolated_groups( remote );
        std::set< std::string > grouped;
        for ( const auto& d : remote )
        {
            if ( grouped.contains( d ) )
                continue;
            auto g = std::find_if( groups.begin(), groups.end(), [ & ]( const std::vector< std::string >& members ) {
                return std::find( members.begin(), members.end(), d ) != members.end();
            } );
            if ( g != groups.end() )
            {
                RefinementStep step;
                step.kind = StepKind::vertical_refine;
                step.domains = *g;
                std::sort( step.domains.begin(), step.domains.end() );
                step.justification = { "4", "5" };
                push( std::move( step ) );
                grouped.insert( g->begin(), g->end() );
                continue;
            }
            domain_steps( d, true, adjacent_degrees );
        }

        for ( auto& step : _tail )
            _plan.steps.push_back( std::move( step ) );
        for ( std::size_t i = 0; i < _plan.steps.size(); ++i )
            _plan.steps[ i ].machine_slot = "M" + std::to_string( i );
        return std::move( _plan );
    }

private:
    const ProblemFrame* subframe_for( const std::string& domain ) const
    {
        auto it = std::find_if( _subs.begin(), _subs.end(),
                                [ & ]( const ProblemFrame& s ) { return s.refines == domain; } );
        return it == _subs.end() ? nullptr : &*it;
    }

    std::vector< std::string > neighbours_of( const std::vector< std::string >& domains ) const
    {
        std::vector< std::string > out;
        for ( const auto& n : _introduced )
            for ( const auto& d : domains )
                if ( frame::share_interface( _all, d, n ) )
                {
                    out.push_back( n );
                    break;
                }
        return out;
    }

    void push( RefinementStep step )
    {
        step.neighbours = neighbours_of( step.domains );
        if ( step.kind != StepKind::vertical_refine )
            step.kind = _plan.steps.empty()     ? StepKind::introduce
                      : step.neighbours.empty() ? StepKind::introduce
                                                : StepKind::horizontal_refine;
        _introduced.insert( step.domains.begin(), step.domains.end() );
        _plan.steps.push_back( std::move( step ) );
    }

    void domain_steps( const std::string& d, bool remote,
                       const std::vector< std::pair< std::string, std::size_t > >& adjacent_degrees )
    {
        const ProblemFrame* sub = subframe_for( d );
        std::vector< std::string > immediate;
        std::vector< std::string > deferred;
        if ( sub )
        {
            const auto& choice = _choices.find( d )->second;
            for ( const auto& n : frame::sub_domains( *sub, _main ) )
                ( choice.of( n ) == Expansion::immediate ? immediate : deferred ).push_back( n );
            std::sort( immediate.begin(), immediate.end() );
            std::sort( deferred.begin(), deferred.end() );
        }

        RefinementStep head;
        head.domains = { d };
        for ( const auto& n : immediate )
            if ( frame::share_interface( *sub, d, n ) )
                head.domains.push_back( n );
        bool first = _plan.steps.empty();
        bool shares = !neighbours_of( head.domains ).empty();
        if ( remote )
            head.justification = { "5" };
        else if ( first )
            head.justification = { "2" };
        else if ( shares )
            head.justification = { "1" };
        else
            head.justification = { "2" };
        if ( !immediate.empty() )
            head.justification.push_back( "3a" );
        head.degrees = adjacent_degrees;
        if ( remote )
            head.degrees = { { d, frame::incoming_degree( _main, d ) } };
        if ( sub )
            head.subframe = sub->name;
        push( std::move( head ) );

        std::vector< std::string > rest;
        for ( const auto& n : immediate )
            if ( !_introduced.contains( n ) )
                rest.push_back( n );
        if ( !rest.empty() )
        {
            RefinementStep step;
            step.domains = rest;
            step.justification = { neighbours_of( rest ).empty() ? "2" : "1" };
            step.subframe = sub->name;
            push( std::move( step ) );
        }

        if ( deferred.empty() )
            return;
        _plan.deferred.push_back( frame::PendingExpansion{ d, sub->name, deferred } );
        RefinementStep step;
        step.kind = StepKind::vertical_refine;
        step.domains = deferred;
        step.subframe = sub->name;
        if ( !immediate.empty() )
        {
            step.justification = { "3a", "4" };
            push( std::move( step ) );
            return;
        }
        step.justification = { "3b" };
        if ( only_local( *sub, d, deferred ) )
            step.justification.push_back( "4" );
        step.neighbours = { d };
        _tail.push_back( std::move( step ) );
    }

    // Deferred domains whose interfaces stay among themselves and the
    // refined domain.
    static bool only_local( const ProblemFrame& sub, const std::string& d, const std::vector< std::string >& group )
    {
        auto local = [ & ]( const std::string& n ) {
            return n == d || std::find( group.begin(), group.end(), n ) != group.end();
        };
        for ( const auto& i : sub.interfaces )
        {
            bool touches = std::any_of( i.endpoints.begin(), i.endpoints.end(),
                                        [ & ]( const frame::Endpoint& e ) { return local( e.domain ) && e.domain != d; } );
            if ( !touches )
                continue;
            if ( !std::all_of( i.endpoints.begin(), i.endpoints.end(),
                               [ & ]( const frame::Endpoint& e ) { return local( e.domain ); } ) )
                return false;
        }
        return true;
    }

    // Components of the machine-less main frame made only of domains not
    // adjacent to the machine, with at least two members.
    std::vector< std::vector< std::string > > isolated_groups( const std::vector< std::string >& remote ) const
    {
        std::map< std::string, std::string > parent;
        std::function< std::string( const std::string& ) > root = [ & ]( const std::string& x ) {
            return parent[ x ] == x ? x : parent[ x ] = root( parent[ x ] );
        };
        for ( const auto& d : _main.domains )
            if ( d.name != _machine )
                parent[ d.name ] = d.name;
        for ( const auto& i : _main.interfaces )
        {
            std::string first;
            for ( const auto& e : i.endpoints )
            {
                if ( e.domain == _machine )
                    continue;
                if ( first.empty() )
                    first = e.domain;
                else
                    parent[ root( e.domain ) ] = root( first );
            }
        }
        std::map< std::string, std::vector< std::string > > members;
        for ( const auto& [ d, _ ] : parent )
            members[ root( d ) ].push_back( d );
        std::vector< std::vector< std::string > > out;
        for ( auto& [ _, group ] : members )
        {
            bool all_remote = std::all_of( group.begin(), group.end(), [ & ]( const std::string& d ) {
                return std::find( remote.begin(), remote.end(), d ) != remote.end();
            } );
            if ( group.size() >= 2 && all_remote )
                out.push_back( group );
        }
        return out;
    }
};

std::string guideline_text( const std::string& g )
{
    if ( g == "1" )
        return "Guideline 1 (domains sharing an interface refine each other horizontally)";
    if ( g == "2" )
        return "Guideline 2 (most incoming interfaces first)";
    if ( g == "3a" )
        return "Guideline 3a (sub-problem detailed immediately)";
    if ( g == "3b" )
        return "Guideline 3b (sub-problem deferred to a vertical refinement)";
    if ( g == "4" )
        return "Guideline 4 (interface-sharing domains related by vertical refinement)";
    if ( g == "5" )
        return "Guideline 5 (not connected to the machine, secondary concern)";
    return "Guideline " + g;
}

} // namespace

std::string_view to_string( StepKind kind )
{
    switch ( kind )
    {
    case StepKind::introduce:
        return "INTRODUCE";
    case StepKind::horizontal_refine:
        return "HORIZONTAL_REFINE";
    case StepKind::vertical_refine:
        return "VERTICAL_REFINE";
    }
    return "?";
}

RefinementPlan derive_plan( const ProblemFrame& main, std::span< const ProblemFrame > subs,
                            const frame::Choices& choices )
{
    reject_cycles( main, subs );
    auto problems = frame::check_subframes( main, subs, choices );
    if ( !problems.empty() )
        throw Error( problems.front().code, problems.front().message, problems.front().span );
    return Planner{ main, subs, choices }.run();
}

std::string explain_step( const RefinementPlan& plan, std::size_t index )
{
    if ( index >= plan.steps.size() )
        throw Error( "E-PLAN-003", "plan has " + std::to_string( plan.steps.size() ) + " steps, no step "
                                       + std::to_string( index ) );
    const auto& step = plan.steps[ index ];
    std::ostringstream out;
    std::string verb = step.kind == StepKind::introduce           ? "introduces"
                     : step.kind == StepKind::horizontal_refine ? "horizontally refines the specification with"
                                                                  : "vertically refines toward";
    out << "Step " << index << " (" << step.machine_slot << ") " << verb << ' ' << join( step.domains, ", " ) << '.';
    for ( const auto& g : step.justification )
    {
        out << ' ' << guideline_text( g ) << ':';
        if ( g == "2" && !step.degrees.empty() )
        {
            out << ' ' << step.domains.front() << " has incoming degree ";
            for ( const auto& [ d, n ] : step.degrees )
                if ( d == step.domains.front() )
                    out << n;
            out << " among the domains adjacent to " << plan.machine << " (";
            for ( std::size_t i = 0; i < step.degrees.size(); ++i )
                out << ( i ? ", " : "" ) << step.degrees[ i ].first << ' ' << step.degrees[ i ].second;
            out << ").";
        }
        else if ( g == "1" )
            out << " shares an interface with " << ( step.neighbours.empty() ? "earlier steps" : join( step.neighbours, ", " ) )
                << '.';
        else if ( g == "3a" )
            out << " sub-frame " << ( step.subframe.empty() ? "?" : step.subframe ) << " is expanded now.";
        else if ( g == "3b" )
            out << " sub-frame " << step.subframe << " keeps the abstract domain until this step.";
        else if ( g == "4" )
            out << ' ' << join( step.domains, ", " ) << " relate to the rest only through a shared interface.";
        else if ( g == "5" )
        {
            out << ' ' << join( step.domains, ", " ) << " has no interface with " << plan.machine;
            if ( !step.degrees.empty() )
                out << " (incoming degree " << step.degrees.front().second << ")";
            out << '.';
        }
        else
            out << " applies.";
    }
    return out.str();
}

std::string format_plan( const RefinementPlan& plan )
{
    std::ostringstream out;
    for ( std::size_t i = 0; i < plan.steps.size(); ++i )
    {
        const auto& s = plan.steps[ i ];
        out << i << ' ' << to_string( s.kind ) << ' ' << s.machine_slot << " guidelines=" << join( s.justification )
            << " domains=" << join( s.domains ) << '\n';
    }
    for ( const auto& d : plan.deferred )
        out << "deferred " << d.domain << " subframe=" << d.subframe << " domains=" << join( d.domains ) << '\n';
    return out.str();
}

RefinementPlan parse_plan( std::string_view text )
{
    RefinementPlan plan;
    int line_no = 0;
    for ( const auto& line : split( text, '\n' ) )
    {
        ++line_no;
        std::istringstream in{ line };
        std::vector< std::string > words;
        for ( std::string w; in >> w; )
            words.push_back( w );
        if ( words.empty() || words[ 0 ].starts_with( "#" ) )
            continue;
        auto field = [ & ]( const std::string& word, std::string_view key ) {
            if ( !word.starts_with( key ) || word.size() < key.size() || word[ key.size() ] != '=' )
                throw ParseError( "E-SYNTAX-030", "expected " + std::string{ key } + "=...", Span{ line_no, 1 } );
            return word.substr( key.size() + 1 );
        };
        if ( words[ 0 ] == "deferred" && words.size() == 4 )
        {
            plan.deferred.push_back( frame::PendingExpansion{ words[ 1 ], field( words[ 2 ], "subframe" ),
                                                              split( field( words[ 3 ], "domains" ), ',' ) } );
            continue;
        }
        if ( words.size() != 5 )
            throw ParseError( "E-SYNTAX-030", "malformed plan line", Span{ line_no, 1 } );
        RefinementStep s;
        if ( words[ 1 ] == "INTRODUCE" )
            s.kind = StepKind::introduce;
        else if ( words[ 1 ] == "HORIZONTAL_REFINE" )
            s.kind = StepKind::horizontal_refine;
        else if ( words[ 1 ] == "VERTICAL_REFINE" )
            s.kind = StepKind::vertical_refine;
        else
            throw ParseError( "E-SYNTAX-030", "unknown step kind '" + words[ 1 ] + "'", Span{ line_no, 1 } );
        s.machine_slot = words[ 2 ];
        s.justification = split( field( words[ 3 ], "guidelines" ), ',' );
        s.domains = split( field( words[ 4 ], "domains" ), ',' );
        plan.steps.push_back( std::move( s ) );
    }
    return plan;
}

} // namespace vdd::plan
