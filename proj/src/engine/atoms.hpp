#pragma once

// Shared by the tableau checker, the oracle and evidence replay: the atoms
// of a formula, compiled against a machine, evaluated on one step.

#include "vdd/engine.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace vdd::engine::detail
{

using Label = std::uint64_t;

struct Atoms
{
    std::vector< const volang::Ltl* > atoms;
    std::vector< specml::CompiledPredicate > predicates;
    std::map< const volang::Ltl*, std::size_t > index;

    Atoms( const volang::Ltl& formula, const specml::CompiledMachine& m );

    // Atom values at a position whose state is `pre` and whose next state
    // is `post` (equal under stutter).
    [[nodiscard]] Label label( const specml::State& pre, const specml::State& post ) const;
};

// Transition ids leaving `state`, or a single `stutter` when it has none.
std::vector< std::uint32_t > moves( const specml::StateSpace& space, std::uint32_t state );

std::uint32_t target( const specml::StateSpace& space, std::uint32_t state, std::uint32_t move );

// Truth of every subformula on the lasso word given per-position labels;
// position labels.size() wraps to `loop`. Returns the root's value at 0.
bool holds_on_word( const volang::Ltl& formula, const Atoms& atoms, std::span< const Label > labels,
                    std::size_t loop );

} // namespace vdd::engine::detail
