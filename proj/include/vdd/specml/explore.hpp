#pragma once

#include "vdd/specml/model.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <unordered_map>
#include <vector>

namespace vdd::specml
{

inline constexpr std::size_t default_cap = 100000;

// Event index into CompiledMachine::events, binding index into the event's
// binding list.
struct Step
{
    std::uint32_t event = 0;
    std::uint32_t binding = 0;
    State target;
};

bool enabled( const CompiledMachine& m, const CompiledEvent& ev, std::size_t binding, const State& s );

// Applies the actions simultaneously. Throws EvalError on a runtime error or
// when a result leaves its declared type.
State apply( const CompiledMachine& m, const CompiledEvent& ev, std::size_t binding, const State& s );

// Enabled steps from `s`, events in declaration order, bindings in order.
std::vector< Step > successors( const CompiledMachine& m, const State& s );

// INITIALISATION results, one per enabled binding (duplicates kept).
std::vector< Step > initial_steps( const CompiledMachine& m );

struct Transition
{
    std::uint32_t source = 0;
    std::uint32_t event = 0;
    std::uint32_t binding = 0;
    std::uint32_t target = 0;

    friend bool operator==( const Transition&, const Transition& ) = default;
};

struct StateSpace
{
    std::vector< State > states;
    std::vector< std::uint32_t > initial;
    std::vector< Transition > transitions; // grouped by source, in BFS order
    std::vector< std::uint32_t > out_begin; // size states + 1
    // Transition that first reached each state; none for initial states.
    std::vector< std::optional< std::uint32_t > > parent;
    bool truncated = false;
    std::size_t cap = default_cap;
    std::unordered_map< State, std::uint32_t, StateHash > index;

    [[nodiscard]] std::size_t size() const { return states.size(); }
    [[nodiscard]] std::span< const Transition > out( std::uint32_t state ) const;
    [[nodiscard]] std::optional< std::uint32_t > find( const State& s ) const;
    [[nodiscard]] bool is_initial( std::uint32_t state ) const;
    // Transitions of a shortest path from an initial state.
    [[nodiscard]] std::vector< std::uint32_t > trace_to( std::uint32_t state ) const;
};

// BFS from the initial states. States beyond `cap` are dropped together with
// the transitions leading to them, and `truncated` is set.
// Throws Error E-EXP-001 when cap < 1, EvalError on action errors.
StateSpace explore( const CompiledMachine& m, std::size_t cap = default_cap );

// Reference implementation: a plain queue, one state at a time.
StateSpace explore_serial( const CompiledMachine& m, std::size_t cap = default_cap );

struct Violation
{
    std::uint32_t state = 0;
    std::string label;
    std::vector< std::uint32_t > trace;
    std::string error; // set when the invariant could not be evaluated
};

// Violations ordered by state index, then invariant declaration order.
std::vector< Violation > check_invariants( const StateSpace& space, const CompiledMachine& m );
std::vector< Violation > check_invariants_serial( const StateSpace& space, const CompiledMachine& m );

// One JSON object per line: states first, then transitions.
void export_space( std::ostream& out, const StateSpace& space, const CompiledMachine& m );

// Replays a trace through step semantics. `start` must be reproduced by
// INITIALISATION and every transition by its event and binding. Returns the
// reached state, or nullopt on the first mismatch.
std::optional< State > replay( const CompiledMachine& m, const StateSpace& space, std::uint32_t start,
                               std::span< const std::uint32_t > trace );

} // namespace vdd::specml
