#include "vdd/frame.hpp"

#include "vdd/lexer.hpp"

#include <algorithm>
#include <sstream>

namespace vdd::frame
{

namespace
{

constexpr std::string_view syntax_code = "E-SYNTAX-020";

bool produces( Role r )
{
    return r == Role::producer || r == Role::both;
}

bool consumes( Role r )
{
    return r == Role::consumer || r == Role::both;
}

std::vector< std::pair< std::string, Span > > name_list( TokenStream& ts )
{
    std::vector< std::pair< std::string, Span > > out;
    do
    {
        const Token& t = ts.expect_identifier( syntax_code, "domain name" );
        out.emplace_back( t.text, t.span );
    } while ( ts.accept( "," ) );
    return out;
}

std::string join( const std::vector< std::string >& names, std::string_view sep = ", " )
{
    std::string out;
    for ( std::size_t i = 0; i < names.size(); ++i )
    {
        if ( i )
            out += sep;
        out += names[ i ];
    }
    return out;
}

} // namespace

std::string_view to_string( DomainKind kind )
{
    switch ( kind )
    {
    case DomainKind::machine:
        return "machine";
    case DomainKind::designed:
        return "designed";
    case DomainKind::given:
        return "given";
    }
    return "?";
}

std::string_view to_string( Role role )
{
    switch ( role )
    {
    case Role::producer:
        return "PRODUCER";
    case Role::consumer:
        return "CONSUMER";
    case Role::both:
        return "BOTH";
    }
    return "?";
}

const Endpoint* Interface::endpoint( std::string_view domain ) const
{
    auto it = std::find_if( endpoints.begin(), endpoints.end(), [ & ]( const Endpoint& e ) { return e.domain == domain; } );
    return it == endpoints.end() ? nullptr : &*it;
}

const Domain* ProblemFrame::domain( std::string_view n ) const
{
    auto it = std::find_if( domains.begin(), domains.end(), [ & ]( const Domain& d ) { return d.name == n; } );
    return it == domains.end() ? nullptr : &*it;
}

const Interface* ProblemFrame::interface( std::string_view n ) const
{
    auto it = std::find_if( interfaces.begin(), interfaces.end(), [ & ]( const Interface& i ) { return i.name == n; } );
    return it == interfaces.end() ? nullptr : &*it;
}

std::vector< std::string > ProblemFrame::machines() const
{
    std::vector< std::string > out;
    for ( const auto& d : domains )
        if ( d.kind == DomainKind::machine )
            out.push_back( d.name );
    return out;
}

ProblemFrame parse_frame( std::string_view text )
{
    ProblemFrame f;
    TokenStream ts{ tokenize( text ) };
    ts.skip_newlines();
    if ( ts.peek().is( "subframe" ) )
    {
        f.span = ts.next().span;
        f.name = ts.expect_identifier( syntax_code, "frame name" ).text;
        ts.expect( "refines", syntax_code );
        f.refines = ts.expect_identifier( syntax_code, "domain name" ).text;
    }
    else
    {
        f.span = ts.expect( "frame", syntax_code ).span;
        f.name = ts.expect_identifier( syntax_code, "frame name" ).text;
    }
    ts.expect_line_end( syntax_code );

    std::vector< std::pair< std::string, Span > > used;
    while ( true )
    {
        ts.skip_newlines();
        if ( ts.at_end() )
            break;
        if ( ts.peek().is( "domain" ) )
        {
            ts.next();
            Domain d;
            const Token& name = ts.expect_identifier( syntax_code, "domain name" );
            d.name = name.text;
            d.span = name.span;
            const Token& kind = ts.expect_identifier( syntax_code, "domain kind (machine, designed, given)" );
            if ( kind.text == "machine" )
                d.kind = DomainKind::machine;
            else if ( kind.text == "designed" )
                d.kind = DomainKind::designed;
            else if ( kind.text == "given" )
                d.kind = DomainKind::given;
            else
                throw ParseError( std::string{ syntax_code },
                                  "unknown domain kind '" + kind.text + "' (expected machine, designed or given)",
                                  kind.span );
            while ( ts.accept( "@" ) )
                d.requirements.push_back( ts.expect_identifier( syntax_code, "requirement id" ).text );
            if ( f.domain( d.name ) )
                throw ParseError( "E-FRAME-005", "domain '" + d.name + "' is declared twice", d.span );
            f.domains.push_back( std::move( d ) );
        }
        else if ( ts.peek().is( "interface" ) )
        {
            ts.next();
            Interface i;
            const Token& name = ts.expect_identifier( syntax_code, "interface name" );
            i.name = name.text;
            i.span = name.span;
            ts.expect( ":", syntax_code );
            auto first = name_list( ts );
            auto add = [ & ]( const std::vector< std::pair< std::string, Span > >& names, Role role ) {
                for ( const auto& [ n, span ] : names )
                {
                    i.endpoints.push_back( Endpoint{ n, role } );
                    used.emplace_back( n, span );
                }
            };
            if ( ts.accept( "->" ) )
            {
                add( first, Role::producer );
                add( name_list( ts ), Role::consumer );
            }
            else if ( ts.accept( "<-" ) )
            {
                add( first, Role::consumer );
                add( name_list( ts ), Role::producer );
            }
            else
                add( first, Role::both );
            if ( ts.accept( "<->" ) )
                add( name_list( ts ), Role::both );
            if ( f.interface( i.name ) )
                throw ParseError( "E-FRAME-005", "interface '" + i.name + "' is declared twice", i.span );
            f.interfaces.push_back( std::move( i ) );
        }
        else
            ts.fail( syntax_code, "expected 'domain' or 'interface' but found " + describe( ts.peek() ) );
        ts.expect_line_end( syntax_code );
    }
    for ( const auto& [ n, span ] : used )
        if ( !f.domain( n ) )
            throw ParseError( "E-FRAME-006", "interface endpoint '" + n + "' is not a declared domain", span );
    return f;
}

std::string print( const ProblemFrame& f )
{
    std::ostringstream out;
    if ( f.refines )
        out << "subframe " << f.name << " refines " << *f.refines << '\n';
    else
        out << "frame " << f.name << '\n';
    for ( const auto& d : f.domains )
    {
        out << "domain " << d.name << ' ' << to_string( d.kind );
        for ( const auto& r : d.requirements )
            out << " @" << r;
        out << '\n';
    }
    for ( const auto& i : f.interfaces )
    {
        std::vector< std::string > producers;
        std::vector< std::string > consumers;
        std::vector< std::string > both;
        for ( const auto& e : i.endpoints )
            ( e.role == Role::producer ? producers : e.role == Role::consumer ? consumers : both ).push_back( e.domain );
        out << "interface " << i.name << ": ";
        if ( !producers.empty() || !consumers.empty() )
        {
            // Either side may be empty only in constructed frames; those do
            // not pass check_frame and are printed best-effort.
            out << join( producers ) << " -> " << join( consumers );
            if ( !both.empty() )
                out << " <-> " << join( both );
        }
        else if ( both.size() >= 2 )
            out << both.front() << " <-> "
                << join( std::vector< std::string >( both.begin() + 1, both.end() ) );
        else
            out << join( both );
        out << '\n';
    }
    return out.str();
}

bool same( const ProblemFrame& a, const ProblemFrame& b )
{
    if ( a.name != b.name || a.refines != b.refines || a.domains.size() != b.domains.size()
         || a.interfaces.size() != b.interfaces.size() )
        return false;
    for ( std::size_t i = 0; i < a.domains.size(); ++i )
    {
        const auto& x = a.domains[ i ];
        const auto& y = b.domains[ i ];
        if ( x.name != y.name || x.kind != y.kind || x.requirements != y.requirements )
            return false;
    }
    auto key = []( const Interface& i ) {
        std::vector< std::pair< std::string, int > > out;
        for ( const auto& e : i.endpoints )
            out.emplace_back( e.domain, static_cast< int >( e.role ) );
        std::sort( out.begin(), out.end() );
        return out;
    };
    for ( std::size_t i = 0; i < a.interfaces.size(); ++i )
        if ( a.interfaces[ i ].name != b.interfaces[ i ].name || key( a.interfaces[ i ] ) != key( b.interfaces[ i ] ) )
            return false;
    return true;
}

Diagnostics check_frame( const ProblemFrame& f, const FrameContext& context )
{
    Diagnostics out;
    auto error = [ & ]( const char* code, const std::string& message, Span span ) {
        out.push_back( make_error( code, message, span ) );
    };

    std::set< std::string > names;
    for ( const auto& d : f.domains )
        if ( !names.insert( d.name ).second )
            error( "E-FRAME-005", "domain '" + d.name + "' is declared twice", d.span );
    std::set< std::string > interface_names;
    for ( const auto& i : f.interfaces )
        if ( !interface_names.insert( i.name ).second )
            error( "E-FRAME-005", "interface '" + i.name + "' is declared twice", i.span );

    auto machines = f.machines();
    if ( !f.refines )
    {
        if ( machines.size() != 1 )
            error( "E-FRAME-001",
                   "a main frame needs exactly one machine domain, found " + std::to_string( machines.size() )
                       + ( machines.empty() ? "" : " (" + join( machines ) + ")" ),
                   f.span );
    }
    else
    {
        if ( machines.size() > 1 )
            error( "E-FRAME-004", "a sub-problem frame may contain at most one machine domain, found "
                                      + join( machines ),
                   f.span );
        if ( context.parent )
        {
            const Domain* refined = context.parent->domain( *f.refines );
            if ( !refined )
                error( "E-FRAME-003", "refined domain '" + *f.refines + "' is not in frame " + context.parent->name,
                       f.span );
            else if ( refined->kind != DomainKind::designed )
                error( "E-FRAME-002",
                       "refined domain '" + *f.refines + "' is " + std::string{ to_string( refined->kind ) }
                           + ", only designed domains can be detailed",
                       f.span );
        }
    }

    for ( const auto& i : f.interfaces )
    {
        std::set< std::string > seen;
        for ( const auto& e : i.endpoints )
        {
            if ( !f.domain( e.domain ) )
                error( "E-FRAME-006", "interface '" + i.name + "' names unknown domain '" + e.domain + "'", i.span );
            if ( !seen.insert( e.domain ).second )
                error( "E-FRAME-005", "interface '" + i.name + "' lists '" + e.domain + "' twice", i.span );
        }
        if ( i.endpoints.size() < 2 )
            error( "E-FRAME-012", "interface '" + i.name + "' needs at least two endpoints", i.span );
        bool source = std::any_of( i.endpoints.begin(), i.endpoints.end(),
                                   []( const Endpoint& e ) { return produces( e.role ); } );
        bool sink = std::any_of( i.endpoints.begin(), i.endpoints.end(),
                                 []( const Endpoint& e ) { return consumes( e.role ); } );
        if ( !source || !sink )
            error( "E-FRAME-007", "no information flows over interface '" + i.name + "'", i.span );
    }

    if ( context.requirements )
        for ( const auto& d : f.domains )
            for ( const auto& r : d.requirements )
                if ( !context.requirements->contains( r ) )
                    error( "E-FRAME-008", "domain '" + d.name + "' is annotated with unknown requirement " + r,
                           d.span );
    return out;
}

std::size_t incoming_degree( const ProblemFrame& f, std::string_view domain )
{
    if ( !f.domain( domain ) )
        throw Error( "E-FRAME-006", "unknown domain '" + std::string{ domain } + "'" );
    std::size_t n = 0;
    for ( const auto& i : f.interfaces )
    {
        const Endpoint* self = i.endpoint( domain );
        if ( !self || !consumes( self->role ) )
            continue;
        bool fed = std::any_of( i.endpoints.begin(), i.endpoints.end(), [ & ]( const Endpoint& e ) {
            return e.domain != domain && produces( e.role );
        } );
        if ( fed )
            ++n;
    }
    return n;
}

bool share_interface( const ProblemFrame& f, std::string_view a, std::string_view b )
{
    return std::any_of( f.interfaces.begin(), f.interfaces.end(),
                        [ & ]( const Interface& i ) { return a != b && i.endpoint( a ) && i.endpoint( b ); } );
}

bool consumes_from( const ProblemFrame& f, std::string_view consumer, std::string_view producer )
{
    if ( consumer == producer )
        return false;
    for ( const auto& i : f.interfaces )
    {
        const Endpoint* c = i.endpoint( consumer );
        const Endpoint* p = i.endpoint( producer );
        if ( c && p && consumes( c->role ) && produces( p->role ) )
            return true;
    }
    return false;
}

Expansion Choice::of( std::string_view sub_domain ) const
{
    auto it = overrides.find( sub_domain );
    return it == overrides.end() ? mode : it->second;
}

std::vector< std::string > sub_domains( const ProblemFrame& sub, const ProblemFrame& parent )
{
    std::vector< std::string > out;
    for ( const auto& d : sub.domains )
        if ( !parent.domain( d.name ) )
            out.push_back( d.name );
    return out;
}

Diagnostics check_subframes( const ProblemFrame& main, std::span< const ProblemFrame > subs, const Choices& choices )
{
    Diagnostics out;
    std::set< std::string > refined;
    for ( const auto& s : subs )
    {
        if ( !s.refines )
        {
            out.push_back( make_error( "E-FRAME-011", "frame '" + s.name + "' is not a sub-problem frame", s.span ) );
            continue;
        }
        const Domain* d = main.domain( *s.refines );
        if ( !d )
        {
            // A sub-frame detailing a domain that only another sub-frame
            // introduces would be a second nesting level.
            bool nested = std::any_of( subs.begin(), subs.end(), [ & ]( const ProblemFrame& other ) {
                return &other != &s && other.domain( *s.refines ) && !main.domain( *s.refines );
            } );
            out.push_back( make_error( nested ? "E-FRAME-011" : "E-FRAME-003",
                                       nested ? "sub-frame '" + s.name + "' details '" + *s.refines
                                                    + "', which is itself a sub-problem domain; only one level of "
                                                      "sub-problems is supported"
                                              : "sub-frame '" + s.name + "' refines unknown domain '" + *s.refines
                                                    + "'",
                                       s.span ) );
            continue;
        }
        if ( d->kind != DomainKind::designed )
            out.push_back( make_error( "E-FRAME-002",
                                       "sub-frame '" + s.name + "' refines " + std::string{ to_string( d->kind ) }
                                           + " domain '" + d->name + "'; only designed domains can be detailed",
                                       s.span ) );
        if ( !refined.insert( *s.refines ).second )
            out.push_back(
                make_error( "E-FRAME-005", "domain '" + *s.refines + "' is detailed by two sub-frames", s.span ) );
        if ( !choices.contains( *s.refines ) )
            out.push_back( make_error( "E-FRAME-009",
                                       "no immediate/deferred choice given for sub-frame '" + s.name + "' (domain "
                                           + *s.refines + ")",
                                       s.span ) );
    }
    return out;
}

namespace
{

void drop_missing_endpoints( ProblemFrame& f )
{
    for ( auto& i : f.interfaces )
        std::erase_if( i.endpoints, [ & ]( const Endpoint& e ) { return !f.domain( e.domain ); } );
    std::erase_if( f.interfaces, []( const Interface& i ) {
        bool source = std::any_of( i.endpoints.begin(), i.endpoints.end(),
                                   []( const Endpoint& e ) { return produces( e.role ); } );
        bool sink = std::any_of( i.endpoints.begin(), i.endpoints.end(),
                                 []( const Endpoint& e ) { return consumes( e.role ); } );
        return i.endpoints.size() < 2 || !source || !sink;
    } );
}

} // namespace

Flattened flatten( const ProblemFrame& main, std::span< const ProblemFrame > subs, const Choices& choices )
{
    auto problems = check_subframes( main, subs, choices );
    if ( !problems.empty() )
        throw Error( problems.front().code, problems.front().message, problems.front().span );

    Flattened out;
    out.frame = main;
    for ( const auto& s : subs )
    {
        const std::string& refined = *s.refines;
        const Choice& choice = choices.find( refined )->second;
        std::vector< std::string > immediate;
        std::vector< std::string > deferred;
        for ( const auto& name : sub_domains( s, main ) )
            ( choice.of( name ) == Expansion::immediate ? immediate : deferred ).push_back( name );
        if ( !deferred.empty() )
            out.deferred.push_back( PendingExpansion{ refined, s.name, deferred } );
        if ( immediate.empty() )
            continue;

        auto is_immediate = [ & ]( const std::string& n ) {
            return std::find( immediate.begin(), immediate.end(), n ) != immediate.end();
        };
        bool replace = deferred.empty();
        ProblemFrame& f = out.frame;

        // Re-attach parent interfaces of the refined domain.
        for ( auto& i : f.interfaces )
        {
            const Endpoint* old = i.endpoint( refined );
            if ( !old )
                continue;
            const Interface* detail = s.interface( i.name );
            std::vector< Endpoint > attached;
            if ( detail )
                for ( const auto& e : detail->endpoints )
                    if ( is_immediate( e.domain ) && !i.endpoint( e.domain ) )
                        attached.push_back( e );
            if ( replace && attached.empty() )
                throw Error( "E-FRAME-010",
                             "interface '" + i.name + "' of " + refined + " cannot be re-attached: sub-frame '" + s.name
                                 + "' has no same-named interface on its immediate domains",
                             i.span );
            if ( replace )
                std::erase_if( i.endpoints, [ & ]( const Endpoint& e ) { return e.domain == refined; } );
            i.endpoints.insert( i.endpoints.end(), attached.begin(), attached.end() );
        }

        if ( replace )
            std::erase_if( f.domains, [ & ]( const Domain& d ) { return d.name == refined; } );
        for ( const auto& d : s.domains )
            if ( is_immediate( d.name ) )
                f.domains.push_back( d );

        // Interfaces internal to the sub-problem that involve its new domains.
        for ( const auto& i : s.interfaces )
        {
            if ( main.interface( i.name ) )
                continue;
            bool involves = std::any_of( i.endpoints.begin(), i.endpoints.end(),
                                         [ & ]( const Endpoint& e ) { return is_immediate( e.domain ); } );
            if ( involves )
                f.interfaces.push_back( i );
        }
        drop_missing_endpoints( f );
    }
    return out;
}

ProblemFrame union_frame( const ProblemFrame& main, std::span< const ProblemFrame > subs )
{
    ProblemFrame out = main;
    for ( const auto& s : subs )
    {
        for ( const auto& d : s.domains )
            if ( !out.domain( d.name ) )
                out.domains.push_back( d );
        for ( const auto& i : s.interfaces )
        {
            auto it = std::find_if( out.interfaces.begin(), out.interfaces.end(),
                                    [ & ]( const Interface& x ) { return x.name == i.name; } );
            if ( it == out.interfaces.end() )
            {
                out.interfaces.push_back( i );
                continue;
            }
            for ( const auto& e : i.endpoints )
            {
                auto ep = std::find_if( it->endpoints.begin(), it->endpoints.end(),
                                        [ & ]( const Endpoint& x ) { return x.domain == e.domain; } );
                if ( ep == it->endpoints.end() )
                    it->endpoints.push_back( e );
                else if ( ep->role != e.role )
                    ep->role = Role::both;
            }
        }
    }
    return out;
}

} // namespace vdd::frame
