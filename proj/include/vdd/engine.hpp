#pragma once

#include "vdd/specml/explore.hpp"
#include "vdd/volang.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vdd::engine
{

enum class Verdict
{
    pass,
    fail,
    inconclusive,
};

std::string_view to_string( Verdict v );

// Strong Kleene connectives; INCONCLUSIVE is the unknown value.
Verdict kleene_and( Verdict a, Verdict b );
Verdict kleene_or( Verdict a, Verdict b );

// Stands for the implicit self-loop completing a deadlock state.
inline constexpr std::uint32_t stutter = std::numeric_limits< std::uint32_t >::max();

// Runs always start in an initial state. `stem` and `cycle` hold transition
// ids of the space (or `stutter`); `cycle` is empty except for lassos, whose
// cycle starts and ends where the stem stops.
struct Evidence
{
    enum class Kind
    {
        none,
        trace,   // finite run ending in `state`
        lasso,
        state,   // witness or violating state, reached by `stem`
    };

    Kind kind = Kind::none;
    std::uint32_t start = 0;
    std::vector< std::uint32_t > stem;
    std::vector< std::uint32_t > cycle;
    std::uint32_t state = 0;
    // Leading stem transitions that only lead from an initial state to the
    // designated start of a SEQ successor; the task itself begins after them.
    std::size_t prefix = 0;
};

struct TaskResult
{
    Verdict verdict = Verdict::inconclusive;
    Evidence evidence;
    std::vector< std::uint32_t > carrier; // sorted state indices
    std::optional< Diagnostic > error;
    std::string detail;
};

struct NodeResult
{
    volang::NodeKind kind = volang::NodeKind::task;
    Verdict verdict = Verdict::inconclusive;
    std::optional< TaskResult > task; // leaves
    std::vector< NodeResult > children;
    std::vector< std::uint32_t > carrier;
    std::optional< Diagnostic > error;
    bool evaluated = true; // false for a SEQ right operand that was skipped
};

// Designated start states; nullopt means the initial states (and, for INV,
// the whole reachable space).
using Starts = std::optional< std::vector< std::uint32_t > >;

// Throws Error (E-VO-*) when the formula does not compile against `m`.
TaskResult eval_ltl( const volang::Ltl& formula, const specml::CompiledMachine& m, const specml::StateSpace& space,
                     const Starts& starts = std::nullopt );

TaskResult eval_inv( const specml::Expr& predicate, const specml::CompiledMachine& m,
                     const specml::StateSpace& space, const Starts& starts = std::nullopt );

TaskResult eval_exists( const specml::Expr& predicate, const specml::CompiledMachine& m,
                        const specml::StateSpace& space, const Starts& starts = std::nullopt );

TaskResult eval_trace( const volang::Scenario& scenario, const specml::CompiledMachine& m,
                       const specml::StateSpace& space, const Starts& starts = std::nullopt );

TaskResult eval_task( const volang::Task& task, const specml::CompiledMachine& m, const specml::StateSpace& space,
                      const Starts& starts = std::nullopt );

// AND/OR evaluate both children; SEQ hands the left carrier to the right
// operand as its start states. An AND carrier is the intersection of its
// children's carriers, an OR carrier the union over passing children.
NodeResult eval_vo( const volang::VOExpr& expr, const specml::CompiledMachine& m, const specml::StateSpace& space,
                    const Starts& starts = std::nullopt );

// Independent brute-force checker. Phase one enumerates every lasso of the
// transition graph with at most `max_len` transitions and evaluates the
// formula on it by unrolling; phase two searches pairs (transition, set of
// subformulas) for a fair violating run. Throws Error E-ENG-030 when phase
// two would exceed `budget` pairs, E-ENG-031 when the space is truncated.
Verdict oracle_ltl( const volang::Ltl& formula, const specml::CompiledMachine& m, const specml::StateSpace& space,
                    std::size_t max_len = 8, std::size_t budget = 1u << 18 );

// Truth of `formula` on the ultimately periodic run stem.cycle^omega, given
// as state sequences: states[i] is the state at position i, and position
// states.size() wraps to `loop`. Used by the oracle and by evidence replay.
bool holds_on_lasso( const volang::Ltl& formula, const specml::CompiledMachine& m,
                     std::span< const specml::State > states, std::size_t loop );

// States visited by a run: start, then each transition's target (a stutter
// repeats the state). nullopt when a transition does not leave the current
// state, or a stutter is taken where an event is enabled.
std::optional< std::vector< specml::State > > replay_run( const specml::CompiledMachine& m,
                                                          const specml::StateSpace& space, const Evidence& ev );

// Re-derives the verdict from the evidence using step semantics only.
// Returns an explanation on mismatch, nullopt when the evidence confirms the
// verdict (or there is nothing to replay).
std::optional< std::string > check_evidence( const volang::Task& task, const TaskResult& result,
                                             const specml::CompiledMachine& m, const specml::StateSpace& space );

// "event(a1, a2)": an event with positional arguments, as TRACE accepts it.
std::string step_text( const specml::CompiledMachine& m, const specml::CompiledEvent& ev, std::size_t binding );

// "event(args), event" for a list of transitions.
std::string format_steps( const specml::CompiledMachine& m, const specml::StateSpace& space,
                          std::span< const std::uint32_t > steps );
std::string format_evidence( const specml::CompiledMachine& m, const specml::StateSpace& space,
                             const Evidence& ev );

} // namespace vdd::engine
