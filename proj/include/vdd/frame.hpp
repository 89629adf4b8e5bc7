#pragma once

#include "vdd/diagnostic.hpp"

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vdd::frame
{

enum class DomainKind
{
    machine,
    designed,
    given,
};

enum class Role
{
    producer,
    consumer,
    both,
};

std::string_view to_string( DomainKind kind );
std::string_view to_string( Role role );

struct Domain
{
    std::string name;
    DomainKind kind = DomainKind::given;
    std::vector< std::string > requirements;
    Span span;
};

struct Endpoint
{
    std::string domain;
    Role role = Role::both;

    friend bool operator==( const Endpoint&, const Endpoint& ) = default;
};

struct Interface
{
    std::string name;
    std::vector< Endpoint > endpoints;
    Span span;

    [[nodiscard]] const Endpoint* endpoint( std::string_view domain ) const;
};

struct ProblemFrame
{
    std::string name;
    std::optional< std::string > refines; // set for sub-problem frames
    std::vector< Domain > domains;
    std::vector< Interface > interfaces;
    Span span;

    [[nodiscard]] const Domain* domain( std::string_view name ) const;
    [[nodiscard]] const Interface* interface( std::string_view name ) const;
    [[nodiscard]] std::vector< std::string > machines() const;
};

// Syntax errors are E-SYNTAX-0xx; duplicate names E-FRAME-005, endpoints
// naming undeclared domains E-FRAME-006.
ProblemFrame parse_frame( std::string_view text );

std::string print( const ProblemFrame& frame );

// Structural equality ignoring spans; endpoint order within an interface is
// not significant.
bool same( const ProblemFrame& a, const ProblemFrame& b );

struct FrameContext
{
    const ProblemFrame* parent = nullptr;          // for sub-problem frames
    const std::set< std::string >* requirements = nullptr; // checked when set
};

Diagnostics check_frame( const ProblemFrame& frame, const FrameContext& context = {} );

// Interfaces over which some other endpoint produces toward `domain`; each
// interface counts at most once. Throws Error E-FRAME-006 for unknown names.
std::size_t incoming_degree( const ProblemFrame& frame, std::string_view domain );

bool share_interface( const ProblemFrame& frame, std::string_view a, std::string_view b );

// True iff `consumer` takes information from `producer` over some interface.
bool consumes_from( const ProblemFrame& frame, std::string_view consumer, std::string_view producer );

enum class Expansion
{
    immediate,
    deferred,
};

// Per refined domain: a default mode plus overrides for individual
// sub-domains (partly immediate sub-problems).
struct Choice
{
    Expansion mode = Expansion::deferred;
    std::map< std::string, Expansion, std::less<> > overrides;

    [[nodiscard]] Expansion of( std::string_view sub_domain ) const;
};

using Choices = std::map< std::string, Choice, std::less<> >;

// Domains a sub-frame adds beyond its parent.
std::vector< std::string > sub_domains( const ProblemFrame& sub, const ProblemFrame& parent );

struct PendingExpansion
{
    std::string domain;
    std::string subframe;
    std::vector< std::string > domains;

    friend bool operator==( const PendingExpansion&, const PendingExpansion& ) = default;
};

struct Flattened
{
    ProblemFrame frame;
    std::vector< PendingExpansion > deferred;
};

// Validates the sub-frame set against the parent: E-FRAME-003 unknown
// refined domain, E-FRAME-002 refined domain not designed, E-FRAME-005 two
// sub-frames for one domain, E-FRAME-011 nesting, E-FRAME-009 missing choice.
Diagnostics check_subframes( const ProblemFrame& main, std::span< const ProblemFrame > subs, const Choices& choices );

// Throws Error with the first check_subframes code, or E-FRAME-010 when a
// parent interface cannot be re-attached.
Flattened flatten( const ProblemFrame& main, std::span< const ProblemFrame > subs, const Choices& choices );

// Main frame plus every sub-frame's domains and interfaces, merged by name.
// Used where every declared relationship matters (impact analysis).
ProblemFrame union_frame( const ProblemFrame& main, std::span< const ProblemFrame > subs );

} // namespace vdd::frame
