#pragma once

#include "vdd/frame.hpp"

#include <span>
#include <string>
#include <vector>

namespace vdd::plan
{

enum class StepKind
{
    introduce,
    horizontal_refine,
    vertical_refine,
};

std::string_view to_string( StepKind kind );

struct RefinementStep
{
    StepKind kind = StepKind::introduce;
    std::vector< std::string > domains;
    std::vector< std::string > justification; // "1", "2", "3a", "3b", "4", "5"
    std::string machine_slot;

    // Context for explanations; not part of the .plan format.
    std::string subframe;
    std::vector< std::pair< std::string, std::size_t > > degrees;
    std::vector< std::string > neighbours;

    friend bool operator==( const RefinementStep& a, const RefinementStep& b )
    {
        return a.kind == b.kind && a.domains == b.domains && a.justification == b.justification
            && a.machine_slot == b.machine_slot;
    }
};

struct RefinementPlan
{
    std::string frame;
    std::string machine;
    std::vector< RefinementStep > steps;
    std::vector< frame::PendingExpansion > deferred;

    friend bool operator==( const RefinementPlan& a, const RefinementPlan& b )
    {
        return a.steps == b.steps && a.deferred == b.deferred;
    }
};

// Throws Error: check_subframes codes, E-PLAN-001 cyclic expansion,
// E-PLAN-002 domain without interfaces.
RefinementPlan derive_plan( const frame::ProblemFrame& main, std::span< const frame::ProblemFrame > subs,
                            const frame::Choices& choices );

// Throws Error E-PLAN-003 when the index is out of range.
std::string explain_step( const RefinementPlan& plan, std::size_t index );

// Stable line format:
//   <index> <KIND> <slot> guidelines=<g,...> domains=<d,...>
//   deferred <domain> subframe=<name> domains=<d,...>
std::string format_plan( const RefinementPlan& plan );
RefinementPlan parse_plan( std::string_view text );

} // namespace vdd::plan
