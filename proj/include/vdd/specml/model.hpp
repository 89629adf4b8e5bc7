#pragma once

#include "vdd/diagnostic.hpp"
#include "vdd/specml/ast.hpp"
#include "vdd/specml/value.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vdd::specml
{

// Static type of an expression. `any` is the element type of `{}` and unifies
// with everything.
struct Type
{
    enum class Kind : std::uint8_t
    {
        boolean,
        integer,
        element,
        set,
        pair,
        any,
    };

    Kind kind = Kind::any;
    std::uint32_t carrier = 0;
    std::vector< Type > parts;

    static Type boolean() { return Type{ Kind::boolean, 0, {} }; }
    static Type integer() { return Type{ Kind::integer, 0, {} }; }
    static Type any() { return Type{ Kind::any, 0, {} }; }
    static Type element( std::uint32_t carrier ) { return Type{ Kind::element, carrier, {} }; }
    static Type set_of( Type element ) { return Type{ Kind::set, 0, { std::move( element ) } }; }
    static Type pair( Type a, Type b ) { return Type{ Kind::pair, 0, { std::move( a ), std::move( b ) } }; }

    [[nodiscard]] bool is_set() const { return kind == Kind::set; }
    [[nodiscard]] bool is_relation() const
    {
        return kind == Kind::set && ( parts[ 0 ].kind == Kind::pair || parts[ 0 ].kind == Kind::any );
    }
};

bool compatible( const Type& a, const Type& b );
// The more specific of two compatible types.
Type unify( const Type& a, const Type& b );
std::string to_string( const Type& t, const Universe& universe );

// A finite declared type: the set of values a variable or parameter ranges over.
struct Domain
{
    enum class Kind
    {
        boolean,
        range,
        carrier,
        powerset,
        partial_function,
        total_function,
    };

    Kind kind = Kind::boolean;
    std::int64_t lo = 0;
    std::int64_t hi = -1;
    std::uint32_t carrier = 0;
    std::uint32_t carrier_size = 0;
    std::vector< Domain > parts;

    [[nodiscard]] Type type() const;
    [[nodiscard]] bool contains( const Value& v ) const;
    // Saturates at infinity rather than overflowing.
    [[nodiscard]] double cardinality() const;
    // All members in ascending Value order.
    [[nodiscard]] std::vector< Value > enumerate() const;
};

std::string to_string( const Domain& d, const Universe& universe );

enum class Op : std::uint8_t
{
    constant,
    variable,
    pre_variable,
    local,
    not_,
    negate,
    and_,
    or_,
    implies,
    iff,
    eq,
    ne,
    lt,
    le,
    gt,
    ge,
    member,
    not_member,
    subset,
    maplet,
    set_union,
    set_intersection,
    set_difference,
    override_,
    domain_restriction,
    domain_subtraction,
    range,
    add,
    sub,
    mul,
    div,
    mod,
    set_literal,
    card,
    dom,
    ran,
    dist,
    abs,
    min,
    max,
    apply,
    forall,
    exists,
};

// Resolved expression. Identifiers are replaced by state or local slots and
// constants are folded to values.
struct CExpr
{
    Op op = Op::constant;
    Type type;
    Value constant;
    int slot = -1;
    std::vector< CExpr > args;   // quantifiers: body, then one generator per bound slot
    std::vector< int > bound;    // quantifier local slots
    Span span;
};

// Evaluation context. `pre` is only consulted by `v$0` references inside
// before-after predicates.
struct Env
{
    const State* post = nullptr;
    const State* pre = nullptr;
    std::vector< Value >* locals = nullptr;
};

// E-EVAL-001 division by zero, E-EVAL-002 value outside its declared type,
// E-EVAL-003 function applied outside its domain, E-EVAL-004 overflow.
struct EvalError : Error
{
    using Error::Error;
};

Value evaluate( const CExpr& e, const Env& env );
bool holds( const CExpr& e, const Env& env );

struct CompiledInvariant
{
    std::string label;
    CExpr predicate;
    Span span;
};

struct CompiledAction
{
    int slot = -1;
    std::optional< CExpr > index;
    CExpr value;
    Span span;
};

struct CompiledEvent
{
    std::string name;
    std::vector< std::string > parameters;
    std::vector< Domain > parameter_domains;
    // Cartesian product of the parameter domains, lexicographic over the
    // parameters in declaration order.
    std::vector< std::vector< Value > > bindings;
    std::vector< CExpr > guards;
    std::vector< CompiledAction > actions;
    Span span;
};

struct NamedValue
{
    Value value;
    Type type;
};

struct CompiledMachine
{
    MachineSpec spec;
    Universe universe;
    std::vector< std::string > variables;
    std::vector< Domain > domains;
    std::map< std::string, NamedValue, std::less<> > constants; // context constants and carrier sets
    std::map< std::string, Value, std::less<> > elements;       // carrier elements
    std::vector< CompiledInvariant > invariants;
    CompiledEvent initialisation;
    std::vector< CompiledEvent > events; // without INITIALISATION, declaration order
    std::size_t locals = 0;              // slots needed by any event or invariant

    [[nodiscard]] const std::string& name() const { return spec.name; }
    [[nodiscard]] int variable_index( std::string_view name ) const;
    [[nodiscard]] int event_index( std::string_view name ) const;
    [[nodiscard]] std::string format_state( const State& s ) const;
    [[nodiscard]] std::string format_binding( const CompiledEvent& ev, std::size_t binding ) const;
};

struct CompileOptions
{
    double max_type_cardinality = 1e12;
    double max_bindings = 1e6;
};

struct CompileResult
{
    std::optional< CompiledMachine > machine;
    Diagnostics diagnostics;
};

// Typechecks and resolves a machine. `machines` is consulted for the
// abstract machine of a refinement (gluing-note presence only).
CompileResult compile( const MachineSpec& machine, std::span< const ContextSpec > contexts,
                       std::span< const MachineSpec > machines = {}, const CompileOptions& options = {} );

Diagnostics typecheck( const MachineSpec& machine, std::span< const ContextSpec > contexts,
                       std::span< const MachineSpec > machines = {}, const CompileOptions& options = {} );

// A predicate compiled against a machine's variables, for use by validation
// tasks. `allow_pre` permits `v$0` references.
struct CompiledPredicate
{
    CExpr expr;
    std::size_t locals = 0;
    std::vector< std::string > variables; // referenced state variables
};

// Throws Error: E-TYPE-001 unknown identifier, E-TYPE-002 type mismatch,
// E-TYPE-005 uninferrable quantifier, E-TYPE-011 `$0` where not allowed.
CompiledPredicate compile_predicate( const CompiledMachine& machine, const Expr& predicate, bool allow_pre );

bool holds( const CompiledPredicate& p, const State& post, const State* pre = nullptr );

} // namespace vdd::specml
