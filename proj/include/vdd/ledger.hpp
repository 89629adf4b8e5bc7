#pragma once

#include "vdd/engine.hpp"
#include "vdd/project.hpp"

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace vdd::ledger
{

std::string sha256_hex( std::string_view data );

// Content hashes of the canonical prints, so layout and comments never count
// as changes.
struct Hashes
{
    std::map< std::string, std::string > machines;    // machine name (print + seen contexts)
    std::map< std::string, std::string > domains;     // domain declaration plus incident interfaces
    std::map< std::string, std::string > obligations; // VO id
    std::string frame;                                // whole scope frame
};

Hashes hash_project( const project::Project& p );

// Per source file, relative path -> hash of its canonical print.
std::map< std::string, std::string > hash_artifacts( const project::Project& p );

enum class Stage
{
    selected,
    vo_written,
    implemented,
    verified,
    validated,
};

std::string_view to_string( Stage s );

struct Entry
{
    enum class Type
    {
        result, // a VO evaluation
        check,  // an invariant check of one machine
    };

    Type type = Type::result;
    std::string vo; // "REQ/M"; empty for checks
    std::string machine;
    engine::Verdict verdict = engine::Verdict::inconclusive;
    std::string machine_hash;
    std::string vo_hash;
    std::string frame_hash;
    std::vector< std::string > scope;
    // Snapshot of the project at record time, for change detection.
    std::map< std::string, std::string > machines;
    std::map< std::string, std::string > domains;
    std::string timestamp;
    std::string detail;
};

std::string to_line( const Entry& e );
// Throws Error E-LED-001 on malformed lines.
Entry from_line( std::string_view line );

// Append-only store backed by `vdd.ledger`. Appends go through one mutex;
// the file is opened, extended and closed per entry.
class Ledger
{
    std::filesystem::path _file;
    std::vector< Entry > _entries;
    mutable std::mutex _mutex;

public:
    Ledger() = default;
    explicit Ledger( std::filesystem::path file );
    Ledger( Ledger&& other ) noexcept : _file{ std::move( other._file ) }, _entries{ std::move( other._entries ) } {}

    // Missing file means an empty ledger. Throws Error E-LED-001.
    static Ledger open( const std::filesystem::path& file );

    void append( Entry e );
    [[nodiscard]] std::vector< Entry > entries() const;
    [[nodiscard]] std::optional< Entry > latest_result( std::string_view vo ) const;
    [[nodiscard]] std::optional< Entry > latest_check( std::string_view machine ) const;
};

// Refuses entries whose hashes do not match the current project with
// E-LED-003.
void record( Ledger& ledger, Entry entry, const Hashes& current );

struct ScopeIndex
{
    std::map< std::string, std::vector< std::string > > scopes; // VO id -> domains
    std::map< std::string, std::string > targets;               // VO id -> machine
    std::map< std::string, std::vector< std::string > > implements;
    std::map< std::string, std::string > refines;
};

ScopeIndex index_project( const project::Project& p );

struct ImpactOptions
{
    project::Discipline discipline = project::Discipline::strict;
    bool transitive = false;
};

// Stale VO ids for a set of changed machines. `added` names the changed
// machines that are new; they count only for the domains no other machine
// implements, and under LIBERAL they stale the VOs of everything they refine.
// Throws Error E-LED-002 for a machine missing from the index.
std::set< std::string > impact( const std::set< std::string >& changed, const std::set< std::string >& added,
                                const ScopeIndex& index, const frame::ProblemFrame& frame,
                                const ImpactOptions& options );

struct Staleness
{
    std::set< std::string > stale;              // VOs whose latest result no longer counts
    std::map< std::string, std::string > why;   // VO id -> reason
};

// Compares every VO's latest result against the current hashes.
Staleness stale_results( const project::Project& p, const Hashes& current, const Ledger& ledger,
                         const ImpactOptions& options );

struct Matrix
{
    std::vector< std::string > requirements;
    std::vector< std::string > machines;
    std::map< std::pair< std::string, std::string >, std::string > cells; // PASS, FAIL, INCONCLUSIVE, STALE
    [[nodiscard]] std::string cell( const std::string& req, const std::string& machine ) const;
};

Matrix matrix( const project::Project& p, const Ledger& ledger, const Staleness& staleness );
std::string format_csv( const Matrix& m );
std::string format_table( const Matrix& m );

struct StageEvidence
{
    bool vo_written = false;
    bool typechecked = false;
    bool invariants_pass = false;
    bool vo_pass = false;
};

// One step forward. Throws Error E-LED-010 naming the missing artifact, or
// when `target` skips a stage. A target at or below `current` is a no-op.
Stage advance_stage( Stage current, Stage target, const StageEvidence& evidence );

// The stage reached by advancing from SELECTED as far as the evidence allows,
// with the reason it stopped there.
std::pair< Stage, std::optional< Diagnostic > > derive_stage( const StageEvidence& evidence );

StageEvidence evidence_for( const project::Project& p, const Hashes& current, const Ledger& ledger,
                            const Staleness& staleness, const std::string& requirement, const std::string& machine );

} // namespace vdd::ledger
