#include "vdd/project.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <fnmatch.h>

namespace vdd::project
{

namespace
{

std::string trim( std::string_view s )
{
    auto b = s.find_first_not_of( " \t\r" );
    if ( b == std::string_view::npos )
        return {};
    auto e = s.find_last_not_of( " \t\r" );
    return std::string{ s.substr( b, e - b + 1 ) };
}

std::vector< std::string > split( std::string_view s, char sep )
{
    std::vector< std::string > out;
    std::size_t start = 0;
    while ( true )
    {
        auto pos = s.find( sep, start );
        out.push_back( trim( s.substr( start, pos - start ) ) );
        if ( pos == std::string_view::npos )
            return out;
        start = pos + 1;
    }
}

frame::Expansion expansion( const std::string& word )
{
    if ( word == "immediate" )
        return frame::Expansion::immediate;
    if ( word == "deferred" )
        return frame::Expansion::deferred;
    throw Error( "E-CLI-001", "expected 'immediate' or 'deferred', got '" + word + "'" );
}

std::string read_file( const std::filesystem::path& p )
{
    std::ifstream in{ p, std::ios::binary };
    if ( !in )
        throw Error( "E-CLI-002", "cannot read " + p.string() );
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

std::string_view to_string( Discipline d ) { return d == Discipline::strict ? "strict" : "liberal"; }

frame::Choice parse_choice( std::string_view text )
{
    frame::Choice c;
    for ( const auto& part : split( text, ',' ) )
    {
        auto colon = part.find( ':' );
        if ( colon == std::string::npos )
        {
            c.mode = expansion( part );
            continue;
        }
        auto sub = trim( std::string_view{ part }.substr( 0, colon ) );
        if ( sub.empty() )
            throw Error( "E-CLI-001", "missing sub-domain before ':' in '" + std::string{ text } + "'" );
        c.overrides[ sub ] = expansion( trim( std::string_view{ part }.substr( colon + 1 ) ) );
    }
    return c;
}

Manifest parse_manifest( std::string_view text )
{
    Manifest m;
    m.globs = { { "frames", "*.frame" },
                { "requirements", "*.req" },
                { "obligations", "*.vo" },
                { "machines", "*.mch" },
                { "contexts", "*.ctx" } };
    int line_no = 0;
    for ( const auto& raw : split( text, '\n' ) )
    {
        ++line_no;
        auto line = trim( raw.substr( 0, raw.find( '#' ) ) );
        if ( line.empty() )
            continue;
        Span span{ line_no, 1 };
        auto eq = line.find( '=' );
        if ( eq == std::string::npos )
            throw Error( "E-CLI-001", "expected 'key = value'", span );
        auto key = trim( std::string_view{ line }.substr( 0, eq ) );
        auto value = trim( std::string_view{ line }.substr( eq + 1 ) );
        try
        {
            if ( key == "name" )
                m.name = value;
            else if ( m.globs.contains( key ) )
                m.globs[ key ] = value;
            else if ( key == "cap" )
            {
                std::size_t cap = 0;
                auto [ p, ec ] = std::from_chars( value.data(), value.data() + value.size(), cap );
                if ( ec != std::errc{} || p != value.data() + value.size() || cap == 0 )
                    throw Error( "E-CLI-001", "cap must be a positive integer" );
                m.cap = cap;
            }
            else if ( key == "refinement_discipline" )
            {
                if ( value == "strict" )
                    m.discipline = Discipline::strict;
                else if ( value == "liberal" )
                    m.discipline = Discipline::liberal;
                else
                    throw Error( "E-CLI-001", "refinement_discipline is 'strict' or 'liberal'" );
            }
            else if ( key.starts_with( "choice." ) && key.size() > 7 )
                m.choices[ key.substr( 7 ) ] = parse_choice( value );
            else
                throw Error( "E-CLI-001", "unknown key '" + key + "'" );
        }
        catch ( const Error& e )
        {
            throw Error( e.code(), e.what(), span );
        }
    }
    return m;
}

std::vector< std::string > matching_files( const std::filesystem::path& root, const std::string& glob )
{
    std::vector< std::string > out;
    std::error_code ec;
    for ( const auto& entry : std::filesystem::directory_iterator{ root, ec } )
    {
        if ( !entry.is_regular_file() )
            continue;
        auto name = entry.path().filename().string();
        if ( fnmatch( glob.c_str(), name.c_str(), FNM_PERIOD ) == 0 )
            out.push_back( name );
    }
    std::sort( out.begin(), out.end() );
    return out;
}

const specml::MachineSpec* Project::machine( std::string_view name ) const
{
    for ( const auto& m : machines )
        if ( m.value.name == name )
            return &m.value;
    return nullptr;
}

std::vector< const volang::ValidationObligation* > Project::all_obligations() const
{
    std::vector< const volang::ValidationObligation* > out;
    for ( const auto& f : obligations )
        for ( const auto& vo : f.value.obligations )
            out.push_back( &vo );
    std::stable_sort( out.begin(), out.end(), []( auto* a, auto* b ) { return a->id < b->id; } );
    return out;
}

const volang::ValidationObligation* Project::obligation( std::string_view id ) const
{
    for ( const auto* vo : all_obligations() )
        if ( vo->id.str() == id )
            return vo;
    return nullptr;
}

std::vector< specml::MachineSpec > Project::machine_specs() const
{
    std::vector< specml::MachineSpec > out;
    for ( const auto& m : machines )
        out.push_back( m.value );
    return out;
}

std::vector< specml::ContextSpec > Project::context_specs() const
{
    std::vector< specml::ContextSpec > out;
    for ( const auto& c : contexts )
        out.push_back( c.value );
    return out;
}

std::vector< std::string > Project::requirement_ids() const
{
    std::vector< std::string > out;
    for ( const auto& r : requirements )
        out.push_back( r.value.id );
    return out;
}

Project load( const std::filesystem::path& root )
{
    Project p;
    p.root = root;
    try
    {
        p.manifest = parse_manifest( read_file( root / "vdd.project" ) );
    }
    catch ( const Error& e )
    {
        throw e.in_file( "vdd.project" );
    }

    auto each = [ & ]( const std::string& kind, auto&& parse ) {
        for ( const auto& file : matching_files( root, p.manifest.globs.at( kind ) ) )
        {
            try
            {
                parse( file, read_file( root / file ) );
            }
            catch ( const Error& e )
            {
                p.diagnostics.push_back( e.in_file( file ).diagnostic() );
            }
        }
    };

    each( "frames", [ & ]( const std::string& file, const std::string& text ) {
        p.frames.push_back( { file, frame::parse_frame( text ) } );
    } );
    each( "requirements", [ & ]( const std::string& file, const std::string& text ) {
        for ( auto& r : volang::parse_requirements( text ) )
            p.requirements.push_back( { file, std::move( r ) } );
    } );
    each( "obligations", [ & ]( const std::string& file, const std::string& text ) {
        p.obligations.push_back( { file, volang::parse_vo_file( text ) } );
    } );
    each( "contexts", [ & ]( const std::string& file, const std::string& text ) {
        p.contexts.push_back( { file, specml::parse_context( text ) } );
    } );
    each( "machines", [ & ]( const std::string& file, const std::string& text ) {
        p.machines.push_back( { file, specml::parse_machine( text ) } );
    } );

    std::set< std::string > seen;
    for ( const auto& r : p.requirements )
        if ( !seen.insert( r.value.id ).second )
        {
            auto d = make_error( "E-VO-001", "requirement " + r.value.id + " is declared twice", r.value.span );
            d.file = r.file;
            p.diagnostics.push_back( d );
        }

    // Frames: exactly one main frame, the rest refine its domains.
    std::string main_file;
    for ( const auto& f : p.frames )
    {
        if ( f.value.refines )
            p.subs.push_back( f.value );
        else if ( p.main )
        {
            auto d = make_error( "E-CLI-003", "second main frame '" + f.value.name + "' (first is '" + p.main->name + "')",
                                 f.value.span );
            d.file = f.file;
            p.diagnostics.push_back( d );
        }
        else
        {
            p.main = f.value;
            main_file = f.file;
        }
    }
    if ( !p.main && !p.frames.empty() )
        p.diagnostics.push_back( make_error( "E-CLI-003", "no main frame among the frame files" ) );
    if ( p.main )
    {
        frame::FrameContext ctx;
        ctx.requirements = &seen;
        for ( auto d : frame::check_frame( *p.main, ctx ) )
        {
            d.file = main_file;
            p.diagnostics.push_back( d );
        }
        for ( const auto& f : p.frames )
            if ( f.value.refines )
            {
                frame::FrameContext sub_ctx{ &*p.main, &seen };
                for ( auto d : frame::check_frame( f.value, sub_ctx ) )
                {
                    d.file = f.file;
                    p.diagnostics.push_back( d );
                }
            }
        for ( auto d : frame::check_subframes( *p.main, p.subs, p.manifest.choices ) )
        {
            d.file = "vdd.project";
            p.diagnostics.push_back( d );
        }
        p.scope_frame = frame::union_frame( *p.main, p.subs );
    }

    auto contexts = p.context_specs();
    auto specs = p.machine_specs();
    for ( const auto& m : p.machines )
    {
        auto result = specml::compile( m.value, contexts, specs );
        for ( auto d : result.diagnostics )
        {
            d.file = m.file;
            p.diagnostics.push_back( d );
        }
        if ( result.machine )
            p.compiled.emplace( m.value.name, std::move( *result.machine ) );
    }

    volang::ResolveContext ctx{ &seen, &p.compiled, &specs, p.main ? &p.scope_frame : nullptr };
    for ( auto& f : p.obligations )
        for ( auto& vo : f.value.obligations )
            for ( auto d : volang::resolve( vo, ctx ) )
            {
                d.file = f.file;
                p.diagnostics.push_back( d );
            }
    return p;
}

} // namespace vdd::project
