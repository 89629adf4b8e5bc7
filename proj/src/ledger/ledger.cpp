#include "vdd/ledger.hpp"

#include "vdd/specml/parser.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

namespace vdd::ledger
{

using nlohmann::json;

namespace
{

std::string domain_print( const frame::ProblemFrame& f, const frame::Domain& d )
{
    std::string out = "domain " + d.name + " " + std::string{ frame::to_string( d.kind ) };
    auto reqs = d.requirements;
    std::sort( reqs.begin(), reqs.end() );
    for ( const auto& r : reqs )
        out += " @" + r;
    out += "\n";
    std::vector< std::string > lines;
    for ( const auto& i : f.interfaces )
    {
        if ( !i.endpoint( d.name ) )
            continue;
        std::vector< std::string > ends;
        for ( const auto& e : i.endpoints )
            ends.push_back( e.domain + ":" + std::string{ frame::to_string( e.role ) } );
        std::sort( ends.begin(), ends.end() );
        std::string line = "interface " + i.name;
        for ( const auto& e : ends )
            line += " " + e;
        lines.push_back( line );
    }
    std::sort( lines.begin(), lines.end() );
    for ( const auto& l : lines )
        out += l + "\n";
    return out;
}

engine::Verdict verdict_from( const std::string& s )
{
    if ( s == "PASS" )
        return engine::Verdict::pass;
    if ( s == "FAIL" )
        return engine::Verdict::fail;
    if ( s == "INCONCLUSIVE" )
        return engine::Verdict::inconclusive;
    throw Error( "E-LED-001", "unknown verdict '" + s + "'" );
}

bool intersects( const std::vector< std::string >& a, const std::set< std::string >& b )
{
    return std::any_of( a.begin(), a.end(), [ & ]( const std::string& x ) { return b.contains( x ); } );
}

} // namespace

std::string sha256_hex( std::string_view data )
{
    unsigned char digest[ EVP_MAX_MD_SIZE ];
    unsigned int len = 0;
    if ( EVP_Digest( data.data(), data.size(), digest, &len, EVP_sha256(), nullptr ) != 1 )
        throw Error( "E-LED-004", "SHA-256 failed" );
    std::ostringstream out;
    for ( unsigned int i = 0; i < len; ++i )
        out << std::hex << std::setw( 2 ) << std::setfill( '0' ) << static_cast< int >( digest[ i ] );
    return out.str();
}

Hashes hash_project( const project::Project& p )
{
    Hashes h;
    for ( const auto& m : p.machines )
    {
        std::string text = specml::print( m.value );
        for ( const auto& name : m.value.sees )
            for ( const auto& c : p.contexts )
                if ( c.value.name == name )
                    text += specml::print( c.value );
        h.machines[ m.value.name ] = sha256_hex( text );
    }
    for ( const auto& d : p.scope_frame.domains )
        h.domains[ d.name ] = sha256_hex( domain_print( p.scope_frame, d ) );
    for ( const auto* vo : p.all_obligations() )
        h.obligations[ vo->id.str() ] = sha256_hex( volang::print( *vo ) );
    h.frame = sha256_hex( frame::print( p.scope_frame ) );
    return h;
}

std::map< std::string, std::string > hash_artifacts( const project::Project& p )
{
    std::map< std::string, std::string > text;
    for ( const auto& f : p.frames )
        text[ f.file ] += frame::print( f.value );
    for ( const auto& r : p.requirements )
        text[ r.file ] += r.value.id + ": " + r.value.text + "\n";
    for ( const auto& f : p.obligations )
    {
        for ( const auto& vo : f.value.obligations )
            text[ f.file ] += volang::print( vo ) + "\n";
        for ( const auto& n : f.value.notes )
            text[ f.file ] += "@note " + n.id.str() + ": " + n.text + "\n";
    }
    for ( const auto& c : p.contexts )
        text[ c.file ] += specml::print( c.value );
    for ( const auto& m : p.machines )
        text[ m.file ] += specml::print( m.value );
    std::map< std::string, std::string > out;
    for ( const auto& [ file, t ] : text )
        out[ file ] = sha256_hex( t );
    return out;
}

std::string_view to_string( Stage s )
{
    switch ( s )
    {
    case Stage::selected:
        return "SELECTED";
    case Stage::vo_written:
        return "VO_WRITTEN";
    case Stage::implemented:
        return "IMPLEMENTED";
    case Stage::verified:
        return "VERIFIED";
    case Stage::validated:
        return "VALIDATED";
    }
    return "?";
}

std::string to_line( const Entry& e )
{
    json j;
    j[ "type" ] = e.type == Entry::Type::result ? "result" : "check";
    if ( e.type == Entry::Type::result )
        j[ "vo" ] = e.vo;
    j[ "machine" ] = e.machine;
    j[ "verdict" ] = engine::to_string( e.verdict );
    j[ "machine_hash" ] = e.machine_hash;
    if ( e.type == Entry::Type::result )
    {
        j[ "vo_hash" ] = e.vo_hash;
        j[ "frame_hash" ] = e.frame_hash;
        j[ "scope" ] = e.scope;
        j[ "machines" ] = e.machines;
        j[ "domains" ] = e.domains;
    }
    j[ "timestamp" ] = e.timestamp;
    if ( !e.detail.empty() )
        j[ "detail" ] = e.detail;
    return j.dump();
}

Entry from_line( std::string_view line )
{
    try
    {
        auto j = json::parse( line );
        Entry e;
        auto type = j.at( "type" ).get< std::string >();
        if ( type == "result" )
            e.type = Entry::Type::result;
        else if ( type == "check" )
            e.type = Entry::Type::check;
        else
            throw Error( "E-LED-001", "unknown entry type '" + type + "'" );
        e.machine = j.at( "machine" ).get< std::string >();
        e.verdict = verdict_from( j.at( "verdict" ).get< std::string >() );
        e.machine_hash = j.at( "machine_hash" ).get< std::string >();
        e.timestamp = j.value( "timestamp", "" );
        e.detail = j.value( "detail", "" );
        if ( e.type == Entry::Type::result )
        {
            e.vo = j.at( "vo" ).get< std::string >();
            e.vo_hash = j.at( "vo_hash" ).get< std::string >();
            e.frame_hash = j.at( "frame_hash" ).get< std::string >();
            e.scope = j.at( "scope" ).get< std::vector< std::string > >();
            e.machines = j.at( "machines" ).get< std::map< std::string, std::string > >();
            e.domains = j.at( "domains" ).get< std::map< std::string, std::string > >();
        }
        return e;
    }
    catch ( const json::exception& ex )
    {
        throw Error( "E-LED-001", std::string{ "malformed ledger line: " } + ex.what() );
    }
}

Ledger::Ledger( std::filesystem::path file ) : _file{ std::move( file ) } {}

Ledger Ledger::open( const std::filesystem::path& file )
{
    Ledger l{ file };
    std::ifstream in{ file };
    std::string line;
    int n = 0;
    while ( std::getline( in, line ) )
    {
        ++n;
        if ( line.empty() )
            continue;
        try
        {
            l._entries.push_back( from_line( line ) );
        }
        catch ( const Error& e )
        {
            throw Error( e.code(), e.what(), Span{ n, 1 }, file.filename().string() );
        }
    }
    return l;
}

void Ledger::append( Entry e )
{
    std::lock_guard lock{ _mutex };
    if ( !_file.empty() )
    {
        std::ofstream out{ _file, std::ios::app };
        out << to_line( e ) << "\n";
        if ( !out )
            throw Error( "E-CLI-002", "cannot append to " + _file.string() );
    }
    _entries.push_back( std::move( e ) );
}

std::vector< Entry > Ledger::entries() const
{
    std::lock_guard lock{ _mutex };
    return _entries;
}

std::optional< Entry > Ledger::latest_result( std::string_view vo ) const
{
    std::lock_guard lock{ _mutex };
    for ( auto it = _entries.rbegin(); it != _entries.rend(); ++it )
        if ( it->type == Entry::Type::result && it->vo == vo )
            return *it;
    return std::nullopt;
}

std::optional< Entry > Ledger::latest_check( std::string_view machine ) const
{
    std::lock_guard lock{ _mutex };
    for ( auto it = _entries.rbegin(); it != _entries.rend(); ++it )
        if ( it->type == Entry::Type::check && it->machine == machine )
            return *it;
    return std::nullopt;
}

void record( Ledger& ledger, Entry entry, const Hashes& current )
{
    auto mismatch = [ & ]( const std::string& what ) {
        throw Error( "E-LED-003", what + " changed since evaluation of " + ( entry.vo.empty() ? entry.machine : entry.vo )
                                      + "; run it again" );
    };
    auto m = current.machines.find( entry.machine );
    if ( m == current.machines.end() || m->second != entry.machine_hash )
        mismatch( "machine " + entry.machine );
    if ( entry.type == Entry::Type::result )
    {
        auto v = current.obligations.find( entry.vo );
        if ( v == current.obligations.end() || v->second != entry.vo_hash )
            mismatch( "obligation" );
        if ( entry.frame_hash != current.frame )
            mismatch( "the frame" );
    }
    ledger.append( std::move( entry ) );
}

ScopeIndex index_project( const project::Project& p )
{
    ScopeIndex index;
    for ( const auto* vo : p.all_obligations() )
    {
        index.scopes[ vo->id.str() ] = volang::scope_of( *vo );
        index.targets[ vo->id.str() ] = vo->id.model;
    }
    for ( const auto& m : p.machines )
    {
        index.implements[ m.value.name ] = m.value.implements;
        if ( m.value.refines )
            index.refines[ m.value.name ] = *m.value.refines;
    }
    return index;
}

std::set< std::string > impact( const std::set< std::string >& changed, const std::set< std::string >& added,
                                const ScopeIndex& index, const frame::ProblemFrame& frame,
                                const ImpactOptions& options )
{
    std::set< std::string > baseline;
    for ( const auto& [ m, domains ] : index.implements )
        if ( !added.contains( m ) )
            baseline.insert( domains.begin(), domains.end() );

    std::set< std::string > touched;
    for ( const auto& m : changed )
    {
        auto it = index.implements.find( m );
        if ( it == index.implements.end() )
            throw Error( "E-LED-002", "unknown machine '" + m + "'" );
        for ( const auto& d : it->second )
            if ( !added.contains( m ) || !baseline.contains( d ) )
                touched.insert( d );
    }

    // Domains that consume from a touched one, one interface hop or the
    // whole chain.
    std::set< std::string > affected = touched;
    std::set< std::string > frontier = touched;
    while ( !frontier.empty() )
    {
        std::set< std::string > next;
        for ( const auto& d : frame.domains )
        {
            if ( affected.contains( d.name ) )
                continue;
            for ( const auto& src : frontier )
                if ( frame.domain( src ) && frame::consumes_from( frame, d.name, src ) )
                {
                    next.insert( d.name );
                    break;
                }
        }
        affected.insert( next.begin(), next.end() );
        if ( !options.transitive )
            break;
        frontier = std::move( next );
    }

    std::set< std::string > ancestors;
    if ( options.discipline == project::Discipline::liberal )
        for ( const auto& m : added )
        {
            auto cur = m;
            for ( auto it = index.refines.find( cur ); it != index.refines.end(); it = index.refines.find( cur ) )
            {
                cur = it->second;
                if ( !ancestors.insert( cur ).second )
                    break;
            }
        }

    std::set< std::string > stale;
    for ( const auto& [ vo, scope ] : index.scopes )
    {
        const auto& target = index.targets.at( vo );
        if ( changed.contains( target ) || ancestors.contains( target ) || intersects( scope, affected ) )
            stale.insert( vo );
    }
    return stale;
}

Staleness stale_results( const project::Project& p, const Hashes& current, const Ledger& ledger,
                         const ImpactOptions& options )
{
    Staleness out;
    auto index = index_project( p );
    std::map< std::pair< std::set< std::string >, std::set< std::string > >, std::set< std::string > > cache;
    for ( const auto* vo : p.all_obligations() )
    {
        auto id = vo->id.str();
        auto entry = ledger.latest_result( id );
        if ( !entry )
            continue;
        auto mark = [ & ]( const std::string& why ) {
            if ( out.stale.insert( id ).second )
                out.why[ id ] = why;
        };
        if ( current.obligations.at( id ) != entry->vo_hash )
            mark( "obligation edited" );

        std::set< std::string > changed, added;
        for ( const auto& [ m, h ] : current.machines )
        {
            auto old = entry->machines.find( m );
            if ( old == entry->machines.end() )
            {
                changed.insert( m );
                added.insert( m );
            }
            else if ( old->second != h )
                changed.insert( m );
        }
        if ( !changed.empty() )
        {
            auto key = std::make_pair( changed, added );
            auto it = cache.find( key );
            if ( it == cache.end() )
                it = cache.emplace( key, impact( changed, added, index, p.scope_frame, options ) ).first;
            if ( it->second.contains( id ) )
            {
                std::string names;
                for ( const auto& m : changed )
                    names += ( names.empty() ? "" : ", " ) + m + ( added.contains( m ) ? " (new)" : "" );
                mark( "machines changed: " + names );
            }
        }

        std::set< std::string > edited;
        for ( const auto& [ d, h ] : current.domains )
        {
            auto old = entry->domains.find( d );
            if ( old == entry->domains.end() || old->second != h )
                edited.insert( d );
        }
        for ( const auto& [ d, h ] : entry->domains )
            if ( !current.domains.contains( d ) )
                edited.insert( d );
        if ( intersects( index.scopes.at( id ), edited ) )
            mark( "frame edited around its scope" );
    }
    return out;
}

std::string Matrix::cell( const std::string& req, const std::string& machine ) const
{
    auto it = cells.find( { req, machine } );
    return it == cells.end() ? "-" : it->second;
}

Matrix matrix( const project::Project& p, const Ledger& ledger, const Staleness& staleness )
{
    Matrix m;
    m.requirements = p.requirement_ids();
    for ( const auto& mch : p.machines )
        m.machines.push_back( mch.value.name );
    std::sort( m.machines.begin(), m.machines.end() );
    for ( const auto* vo : p.all_obligations() )
    {
        auto entry = ledger.latest_result( vo->id.str() );
        if ( !entry )
            continue;
        m.cells[ { vo->id.requirement, vo->id.model } ] =
            staleness.stale.contains( vo->id.str() ) ? "STALE" : std::string{ engine::to_string( entry->verdict ) };
    }
    return m;
}

std::string format_csv( const Matrix& m )
{
    std::string out = "requirement";
    for ( const auto& c : m.machines )
        out += "," + c;
    out += "\n";
    for ( const auto& r : m.requirements )
    {
        out += r;
        for ( const auto& c : m.machines )
            out += "," + m.cell( r, c );
        out += "\n";
    }
    return out;
}

std::string format_table( const Matrix& m )
{
    std::vector< std::vector< std::string > > rows;
    rows.push_back( { "requirement" } );
    for ( const auto& c : m.machines )
        rows.back().push_back( c );
    for ( const auto& r : m.requirements )
    {
        rows.push_back( { r } );
        for ( const auto& c : m.machines )
            rows.back().push_back( m.cell( r, c ) );
    }
    std::vector< std::size_t > width( rows.front().size(), 0 );
    for ( const auto& row : rows )
        for ( std::size_t i = 0; i < row.size(); ++i )
            width[ i ] = std::max( width[ i ], row[ i ].size() );
    std::string out;
    for ( const auto& row : rows )
    {
        std::string line;
        for ( std::size_t i = 0; i < row.size(); ++i )
        {
            line += row[ i ];
            if ( i + 1 < row.size() )
                line += std::string( width[ i ] - row[ i ].size() + 2, ' ' );
        }
        out += line + "\n";
    }
    return out;
}

Stage advance_stage( Stage current, Stage target, const StageEvidence& evidence )
{
    if ( target <= current )
        return current;
    if ( static_cast< int >( target ) != static_cast< int >( current ) + 1 )
        throw Error( "E-LED-010", "cannot advance from " + std::string{ to_string( current ) } + " to "
                                      + std::string{ to_string( target ) } + " without the stages between" );
    auto missing = [ & ]( const std::string& what ) {
        throw Error( "E-LED-010", std::string{ to_string( target ) } + " needs " + what );
    };
    switch ( target )
    {
    case Stage::vo_written:
        if ( !evidence.vo_written )
            missing( "a validation obligation (no VO file entry)" );
        break;
    case Stage::implemented:
        if ( !evidence.typechecked )
            missing( "a machine that typechecks" );
        break;
    case Stage::verified:
        if ( !evidence.invariants_pass )
            missing( "a passing invariant check of the current machine" );
        break;
    case Stage::validated:
        if ( !evidence.vo_pass )
            missing( "a current PASS of the obligation" );
        break;
    case Stage::selected:
        break;
    }
    return target;
}

std::pair< Stage, std::optional< Diagnostic > > derive_stage( const StageEvidence& evidence )
{
    Stage s = Stage::selected;
    for ( auto t : { Stage::vo_written, Stage::implemented, Stage::verified, Stage::validated } )
    {
        try
        {
            s = advance_stage( s, t, evidence );
        }
        catch ( const Error& e )
        {
            return { s, e.diagnostic() };
        }
    }
    return { s, std::nullopt };
}

StageEvidence evidence_for( const project::Project& p, const Hashes& current, const Ledger& ledger,
                            const Staleness& staleness, const std::string& requirement, const std::string& machine )
{
    StageEvidence ev;
    auto id = requirement + "/" + machine;
    ev.vo_written = p.obligation( id ) != nullptr;
    ev.typechecked = p.compiled.contains( machine );
    auto hash = current.machines.find( machine );
    if ( auto check = ledger.latest_check( machine ) )
        ev.invariants_pass = hash != current.machines.end() && check->machine_hash == hash->second
                          && check->verdict == engine::Verdict::pass;
    if ( auto result = ledger.latest_result( id ) )
        ev.vo_pass = !staleness.stale.contains( id ) && result->verdict == engine::Verdict::pass;
    return ev;
}

} // namespace vdd::ledger
