#pragma once

#include "vdd/diagnostic.hpp"
#include "vdd/frame.hpp"
#include "vdd/specml/ast.hpp"
#include "vdd/specml/model.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace vdd::volang
{

struct Requirement
{
    std::string id;
    std::string text;
    Span span;
};

// `REQid: text` per line, `#` comments. Duplicate ids are E-VO-001.
std::vector< Requirement > parse_requirements( std::string_view text );

enum class LtlOp
{
    state,   // {p}
    ba,      // BA(p), p may use v$0
    truth,
    falsity,
    not_,
    and_,
    or_,
    implies,
    next,
    globally,
    finally,
    until,
};

struct Ltl
{
    LtlOp op = LtlOp::truth;
    specml::Expr predicate; // atoms only
    std::vector< Ltl > args;
    Span span;

    static Ltl make( LtlOp op, std::vector< Ltl > args, Span span = {} );
    static Ltl atom( LtlOp op, specml::Expr predicate, Span span = {} );
};

bool same( const Ltl& a, const Ltl& b );
bool is_temporal( const Ltl& f );
std::size_t depth( const Ltl& f );
Ltl parse_ltl( std::string_view text );
std::string print( const Ltl& f );

enum class TaskKind
{
    ltl,
    inv,
    trace,
    exists,
};

std::string_view to_string( TaskKind kind );

struct TraceStep
{
    std::string event;
    std::vector< specml::Expr > positional;
    std::vector< std::pair< std::string, specml::Expr > > named;
    Span span;
};

struct Scenario
{
    std::vector< TraceStep > steps;
    std::optional< specml::Expr > final;
};

struct Task
{
    std::string label;
    TaskKind kind = TaskKind::inv;
    std::optional< Ltl > ltl;                 // ltl
    std::optional< specml::Expr > predicate; // inv, exists
    std::optional< Scenario > scenario;      // trace
    std::vector< std::string > scope;
    bool explicit_scope = false;
    Span span;
};

enum class NodeKind
{
    task,
    and_,
    or_,
    seq,
};

struct VOExpr
{
    NodeKind kind = NodeKind::task;
    std::optional< Task > task;
    std::vector< VOExpr > children; // exactly two for and/or/seq
    Span span;
};

struct VOId
{
    std::string requirement;
    std::string model;

    [[nodiscard]] std::string str() const { return requirement + "/" + model; }
    friend auto operator<=>( const VOId&, const VOId& ) = default;
};

struct ValidationObligation
{
    VOId id;
    VOExpr expr;
    Span span;
};

struct Note
{
    VOId id;
    std::string text;
};

struct VOFile
{
    std::vector< ValidationObligation > obligations;
    std::vector< Note > notes;
};

// Precedence, loosest first: `;` (SEQ), `or`, `&`; parentheses group.
// A task is `[LABEL :=] KIND(args)[scope]` or `[LABEL :=] formula`; a bare
// formula's kind comes from the label prefix (LTL, INV, EXISTS) or, without
// one, from whether it uses temporal operators.
ValidationObligation parse_vo( std::string_view text );
VOFile parse_vo_file( std::string_view text );

std::string print( const Task& t );
std::string print( const VOExpr& e );
std::string print( const ValidationObligation& vo );

bool same( const VOExpr& a, const VOExpr& b );
bool same( const ValidationObligation& a, const ValidationObligation& b );

// Visits every task leaf, left to right.
template < typename F >
void for_each_task( VOExpr& e, F&& f )
{
    if ( e.kind == NodeKind::task )
        f( *e.task );
    for ( auto& c : e.children )
        for_each_task( c, f );
}

template < typename F >
void for_each_task( const VOExpr& e, F&& f )
{
    if ( e.kind == NodeKind::task )
        f( *e.task );
    for ( const auto& c : e.children )
        for_each_task( c, f );
}

struct ResolveContext
{
    const std::set< std::string >* requirements = nullptr;
    // Compiled machines by name; machines that failed to compile are absent.
    const std::map< std::string, specml::CompiledMachine, std::less<> >* machines = nullptr;
    // All parsed machines, for the refinement chain used by scope inference.
    const std::vector< specml::MachineSpec >* specs = nullptr;
    const frame::ProblemFrame* frame = nullptr;
};

// Binds the VO against its target machine and fills inferred scopes.
// E-VO-002 unknown requirement, E-VO-003 unknown machine, E-VO-004 unresolved
// symbol, E-VO-005 type error, E-VO-006 `$0` outside BA, E-VO-007 unknown
// scope domain, E-VO-008 trace binding.
Diagnostics resolve( ValidationObligation& vo, const ResolveContext& context );

// Union of the scopes of all tasks.
std::vector< std::string > scope_of( const ValidationObligation& vo );

// Parameter binding of a trace step as an index into the event's bindings.
// Throws Error E-VO-008 when incomplete or out of type.
std::size_t binding_index( const specml::CompiledMachine& m, const specml::CompiledEvent& ev, const TraceStep& step );

} // namespace vdd::volang
