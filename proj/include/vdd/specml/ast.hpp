#pragma once

#include "vdd/diagnostic.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace vdd::specml
{

enum class ExprKind
{
    integer,
    boolean,
    identifier,
    pre_identifier, // v$0, only meaningful inside before-after predicates
    unary,          // op: "not" | "-"
    binary,         // op: ASCII operator spelling
    set_literal,
    call,           // op: builtin name
    apply,          // args: function, argument
    quantifier,     // op: "forall" | "exists"; bound: variable names; args: body
};

// Parse tree shared by machines, contexts and validation obligations.
// Identifiers are unresolved; see model.hpp for the typed form.
struct Expr
{
    ExprKind kind = ExprKind::boolean;
    std::string op;
    std::int64_t value = 0;
    std::vector< std::string > bound;
    std::vector< Expr > args;
    Span span;

    static Expr integer( std::int64_t v, Span span = {} );
    static Expr boolean( bool b, Span span = {} );
    static Expr identifier( std::string name, Span span = {} );
    static Expr unary( std::string op, Expr operand, Span span = {} );
    static Expr binary( std::string op, Expr lhs, Expr rhs, Span span = {} );
};

// Structural equality, ignoring source positions.
bool same( const Expr& a, const Expr& b );

// Collects identifiers that occur free (not quantifier-bound), in order of
// first occurrence. `pre` selects v$0 occurrences instead of plain ones.
std::vector< std::string > free_identifiers( const Expr& e, bool pre = false );

bool mentions_pre_state( const Expr& e );

struct DeclType
{
    enum class Kind
    {
        boolean,
        range,
        carrier,
        set_of,
        partial_function,
        total_function,
        integer, // INT: rejected as not finite
        natural, // NAT: rejected as not finite
    };

    Kind kind = Kind::boolean;
    std::string name;              // carrier
    std::vector< Expr > bounds;    // range: lo, hi
    std::vector< DeclType > parts; // set_of: element; functions: domain, range
    Span span;
};

bool same( const DeclType& a, const DeclType& b );

struct CarrierDecl
{
    std::string name;
    std::vector< std::string > elements;
    Span span;
};

struct ConstantDecl
{
    std::string name;
    Expr value;
    Span span;
};

struct ContextSpec
{
    std::string name;
    std::vector< CarrierDecl > sets;
    std::vector< ConstantDecl > constants;
    Span span;
};

struct VariableDecl
{
    std::string name;
    DeclType type;
    Span span;
};

struct LabeledPredicate
{
    std::string label;
    Expr predicate;
    Span span;
};

// `target := value`, or `target(index) := value` as shorthand for a
// functional override.
struct Assignment
{
    std::string target;
    std::optional< Expr > index;
    Expr value;
    Span span;
};

struct Parameter
{
    std::string name;
    DeclType type;
    Span span;
};

inline constexpr std::string_view initialisation_name = "INITIALISATION";

struct EventSpec
{
    std::string name;
    std::vector< Parameter > parameters;
    std::vector< Expr > guards;
    std::vector< Assignment > actions;
    Span span;

    [[nodiscard]] bool is_initialisation() const { return name == initialisation_name; }
};

// `# @glue v: predicate` header lines of a refining machine.
struct GluingNote
{
    std::string variable;
    std::string text;
    Span span;
};

struct MachineSpec
{
    std::string name;
    std::optional< std::string > refines;
    std::vector< std::string > sees;
    std::vector< std::string > implements;
    std::vector< GluingNote > gluing;
    std::vector< VariableDecl > variables;
    std::vector< LabeledPredicate > invariants;
    std::vector< EventSpec > events;
    Span span;
};

bool same( const MachineSpec& a, const MachineSpec& b );
bool same( const ContextSpec& a, const ContextSpec& b );

} // namespace vdd::specml
