#pragma once

#include "vdd/diagnostic.hpp"
#include "vdd/frame.hpp"
#include "vdd/specml/model.hpp"
#include "vdd/specml/parser.hpp"
#include "vdd/volang.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vdd::project
{

enum class Discipline
{
    strict,
    liberal,
};

std::string_view to_string( Discipline d );

struct Manifest
{
    std::string name;
    // kind ("frames", "requirements", "obligations", "machines", "contexts") -> glob
    std::map< std::string, std::string > globs;
    std::size_t cap = 100000;
    Discipline discipline = Discipline::strict;
    frame::Choices choices;
};

// Flat `key = value` lines, `#` comments. Unknown keys and malformed values
// are E-CLI-001.
Manifest parse_manifest( std::string_view text );

// "immediate", "deferred", or "Sub:mode, Sub:mode" (overrides on top of a
// deferred default; a bare mode among them sets the default).
frame::Choice parse_choice( std::string_view text );

template < typename T >
struct Sourced
{
    std::string file; // relative to the project root
    T value;
};

struct Project
{
    std::filesystem::path root;
    Manifest manifest;

    std::vector< Sourced< frame::ProblemFrame > > frames;
    std::vector< Sourced< volang::Requirement > > requirements;
    std::vector< Sourced< volang::VOFile > > obligations;
    std::vector< Sourced< specml::ContextSpec > > contexts;
    std::vector< Sourced< specml::MachineSpec > > machines;

    std::optional< frame::ProblemFrame > main;
    std::vector< frame::ProblemFrame > subs;
    frame::ProblemFrame scope_frame; // main plus sub-frames, see union_frame

    std::map< std::string, specml::CompiledMachine, std::less<> > compiled;
    Diagnostics diagnostics; // parse, frame, type and resolution problems

    [[nodiscard]] const specml::MachineSpec* machine( std::string_view name ) const;
    [[nodiscard]] std::vector< const volang::ValidationObligation* > all_obligations() const;
    [[nodiscard]] const volang::ValidationObligation* obligation( std::string_view id ) const;
    [[nodiscard]] std::vector< specml::MachineSpec > machine_specs() const;
    [[nodiscard]] std::vector< specml::ContextSpec > context_specs() const;
    [[nodiscard]] std::vector< std::string > requirement_ids() const;
};

// Files matching `glob` directly inside `root`, sorted by name.
std::vector< std::string > matching_files( const std::filesystem::path& root, const std::string& glob );

// Throws Error E-CLI-002 when vdd.project cannot be read, E-CLI-001 when it
// is malformed. Everything else lands in Project::diagnostics.
Project load( const std::filesystem::path& root );

} // namespace vdd::project
