#include "atoms.hpp"

#include <algorithm>

namespace vdd::engine
{

namespace
{

specml::CompiledPredicate compile( const specml::CompiledMachine& m, const specml::Expr& p )
{
    try
    {
        return specml::compile_predicate( m, p, false );
    }
    catch ( const Error& e )
    {
        throw Error( "E-ENG-001", e.what(), e.span() );
    }
}

std::vector< std::uint32_t > sorted( std::vector< std::uint32_t > v )
{
    std::ranges::sort( v );
    v.erase( std::unique( v.begin(), v.end() ), v.end() );
    return v;
}

std::vector< std::uint32_t > all_states( const specml::StateSpace& space )
{
    std::vector< std::uint32_t > v( space.size() );
    for ( std::uint32_t i = 0; i < v.size(); ++i )
        v[ i ] = i;
    return v;
}

// States reachable from `from`, in BFS order, with the transition that first
// reached each one.
struct Search
{
    std::vector< std::uint32_t > order;
    std::vector< std::optional< std::uint32_t > > via;
    std::vector< bool > seen;
};

Search search( const specml::StateSpace& space, const std::vector< std::uint32_t >& from )
{
    Search s;
    s.via.assign( space.size(), std::nullopt );
    s.seen.assign( space.size(), false );
    for ( auto x : from )
        if ( !s.seen[ x ] )
        {
            s.seen[ x ] = true;
            s.order.push_back( x );
        }
    for ( std::size_t i = 0; i < s.order.size(); ++i )
    {
        auto v = s.order[ i ];
        for ( std::uint32_t t = space.out_begin[ v ]; t < space.out_begin[ v + 1 ]; ++t )
        {
            auto w = space.transitions[ t ].target;
            if ( !s.seen[ w ] )
            {
                s.seen[ w ] = true;
                s.via[ w ] = t;
                s.order.push_back( w );
            }
        }
    }
    return s;
}

// Evidence path to `state`: from an initial state to the search origin, then
// along the search tree.
Evidence path_to( const specml::StateSpace& space, const Search& s, std::uint32_t state, bool from_initial )
{
    Evidence ev;
    std::vector< std::uint32_t > tail;
    std::uint32_t cur = state;
    while ( s.via[ cur ] )
    {
        tail.push_back( *s.via[ cur ] );
        cur = space.transitions[ *s.via[ cur ] ].source;
    }
    std::ranges::reverse( tail );
    if ( !from_initial || !space.is_initial( cur ) )
        ev.stem = space.trace_to( cur );
    ev.prefix = ev.stem.size();
    ev.start = ev.stem.empty() ? cur : space.transitions[ ev.stem.front() ].source;
    ev.stem.insert( ev.stem.end(), tail.begin(), tail.end() );
    ev.state = state;
    return ev;
}

Diagnostic eval_diagnostic( const specml::EvalError& e, const specml::CompiledMachine& m,
                            const specml::State& state )
{
    Diagnostic d = e.diagnostic();
    d.message += " in state " + m.format_state( state );
    return d;
}

std::vector< std::uint32_t > intersect( const std::vector< std::uint32_t >& a, const std::vector< std::uint32_t >& b )
{
    std::vector< std::uint32_t > out;
    std::ranges::set_intersection( a, b, std::back_inserter( out ) );
    return out;
}

std::vector< std::uint32_t > unite( const std::vector< std::uint32_t >& a, const std::vector< std::uint32_t >& b )
{
    std::vector< std::uint32_t > out;
    std::ranges::set_union( a, b, std::back_inserter( out ) );
    return out;
}

// `event(v1, v2)`, which reparses as a TRACE step.
} // namespace

std::string step_text( const specml::CompiledMachine& m, const specml::CompiledEvent& ev, std::size_t binding )
{
    std::string out = ev.name;
    if ( ev.parameters.empty() )
        return out;
    out += "(";
    for ( std::size_t i = 0; i < ev.parameters.size(); ++i )
        out += ( i ? ", " : "" ) + specml::to_string( ev.bindings[ binding ][ i ], m.universe );
    return out + ")";
}

std::string_view to_string( Verdict v )
{
    switch ( v )
    {
    case Verdict::pass:
        return "PASS";
    case Verdict::fail:
        return "FAIL";
    case Verdict::inconclusive:
        return "INCONCLUSIVE";
    }
    return "?";
}

Verdict kleene_and( Verdict a, Verdict b )
{
    if ( a == Verdict::fail || b == Verdict::fail )
        return Verdict::fail;
    if ( a == Verdict::inconclusive || b == Verdict::inconclusive )
        return Verdict::inconclusive;
    return Verdict::pass;
}

Verdict kleene_or( Verdict a, Verdict b )
{
    if ( a == Verdict::pass || b == Verdict::pass )
        return Verdict::pass;
    if ( a == Verdict::inconclusive || b == Verdict::inconclusive )
        return Verdict::inconclusive;
    return Verdict::fail;
}

TaskResult eval_inv( const specml::Expr& predicate, const specml::CompiledMachine& m,
                     const specml::StateSpace& space, const Starts& starts )
{
    TaskResult result;
    auto p = compile( m, predicate );
    // Without designated starts every explored state is checked; after a SEQ
    // only the handed-over states are.
    std::vector< std::uint32_t > checked = starts ? sorted( *starts ) : all_states( space );
    // Shortest violation first: BFS discovery order of the space.
    std::ranges::sort( checked );
    for ( auto s : checked )
    {
        bool ok = false;
        try
        {
            ok = specml::holds( p, space.states[ s ] );
        }
        catch ( const specml::EvalError& e )
        {
            result.error = eval_diagnostic( e, m, space.states[ s ] );
            result.detail = e.what();
            result.evidence.kind = Evidence::Kind::state;
            result.evidence.stem = space.trace_to( s );
            result.evidence.start = result.evidence.stem.empty() ? s : space.transitions[ result.evidence.stem[ 0 ] ].source;
            result.evidence.state = s;
            return result;
        }
        if ( !ok )
        {
            result.verdict = Verdict::fail;
            Evidence& ev = result.evidence;
            ev.kind = Evidence::Kind::trace;
            ev.stem = space.trace_to( s );
            ev.start = ev.stem.empty() ? s : space.transitions[ ev.stem.front() ].source;
            ev.state = s;
            result.detail = "violated after " + std::to_string( ev.stem.size() ) + " step(s) in state "
                          + m.format_state( space.states[ s ] );
            return result;
        }
    }
    if ( space.truncated && !starts )
    {
        result.detail = "state space truncated at " + std::to_string( space.cap ) + " states";
        return result;
    }
    result.verdict = Verdict::pass;
    result.carrier = checked;
    return result;
}

TaskResult eval_exists( const specml::Expr& predicate, const specml::CompiledMachine& m,
                        const specml::StateSpace& space, const Starts& starts )
{
    TaskResult result;
    auto p = compile( m, predicate );
    Search s = search( space, starts ? sorted( *starts ) : space.initial );
    std::optional< std::uint32_t > first;
    for ( auto v : s.order )
    {
        try
        {
            if ( specml::holds( p, space.states[ v ] ) )
            {
                if ( !first )
                    first = v;
                result.carrier.push_back( v );
            }
        }
        catch ( const specml::EvalError& e )
        {
            result.error = eval_diagnostic( e, m, space.states[ v ] );
            result.detail = e.what();
            result.carrier.clear();
            return result;
        }
    }
    std::ranges::sort( result.carrier );
    if ( first )
    {
        result.verdict = Verdict::pass;
        result.evidence = path_to( space, s, *first, !starts );
        result.evidence.kind = Evidence::Kind::state;
        result.detail = "witness " + m.format_state( space.states[ *first ] );
        return result;
    }
    if ( space.truncated )
    {
        result.detail = "no witness in the truncated space";
        return result;
    }
    result.verdict = Verdict::fail;
    result.detail = "no reachable state satisfies the predicate";
    return result;
}

TaskResult eval_trace( const volang::Scenario& scenario, const specml::CompiledMachine& m,
                       const specml::StateSpace& space, const Starts& starts )
{
    TaskResult result;
    std::optional< specml::CompiledPredicate > final;
    if ( scenario.final )
        final = compile( m, *scenario.final );
    struct Resolved
    {
        std::size_t event;
        std::size_t binding;
    };
    std::vector< Resolved > steps;
    for ( const auto& st : scenario.steps )
    {
        int e = m.event_index( st.event );
        if ( e < 0 )
            throw Error( "E-ENG-001", "unknown event '" + st.event + "'", st.span );
        const auto& ev = m.events[ static_cast< std::size_t >( e ) ];
        steps.push_back( { static_cast< std::size_t >( e ), volang::binding_index( m, ev, st ) } );
    }

    std::vector< std::uint32_t > from = starts ? sorted( *starts ) : space.initial;
    std::vector< std::uint32_t > ends;
    Evidence last;
    for ( auto start : from )
    {
        Evidence ev;
        ev.kind = Evidence::Kind::trace;
        if ( !space.is_initial( start ) || starts )
            ev.stem = space.trace_to( start );
        ev.prefix = ev.stem.size();
        ev.start = ev.stem.empty() ? start : space.transitions[ ev.stem.front() ].source;
        std::uint32_t cur = start;
        for ( std::size_t i = 0; i < steps.size(); ++i )
        {
            const auto& event = m.events[ steps[ i ].event ];
            bool on = false;
            try
            {
                on = specml::enabled( m, event, steps[ i ].binding, space.states[ cur ] );
            }
            catch ( const specml::EvalError& e )
            {
                on = false;
            }
            std::optional< std::uint32_t > taken;
            if ( on )
                for ( std::uint32_t t = space.out_begin[ cur ]; t < space.out_begin[ cur + 1 ]; ++t )
                    if ( space.transitions[ t ].event == steps[ i ].event
                         && space.transitions[ t ].binding == steps[ i ].binding )
                    {
                        taken = t;
                        break;
                    }
            if ( !on )
            {
                ev.state = cur;
                result.verdict = Verdict::fail;
                result.evidence = ev;
                result.error = make_error( "E-ENG-010",
                                           "step " + std::to_string( i + 1 ) + " ("
                                               + step_text( m, event, steps[ i ].binding )
                                               + ") is not enabled in state " + m.format_state( space.states[ cur ] ),
                                           scenario.steps[ i ].span );
                result.detail = result.error->message;
                return result;
            }
            if ( !taken )
            {
                // Enabled, but the transition was cut off by the cap.
                result.verdict = Verdict::inconclusive;
                result.detail = "state space truncated during the scenario";
                return result;
            }
            ev.stem.push_back( *taken );
            cur = space.transitions[ *taken ].target;
        }
        ev.state = cur;
        if ( final )
        {
            bool ok = false;
            try
            {
                ok = specml::holds( *final, space.states[ cur ] );
            }
            catch ( const specml::EvalError& e )
            {
                result.error = eval_diagnostic( e, m, space.states[ cur ] );
                result.detail = e.what();
                return result;
            }
            if ( !ok )
            {
                result.verdict = Verdict::fail;
                result.evidence = ev;
                result.detail = "final predicate false in state " + m.format_state( space.states[ cur ] );
                return result;
            }
        }
        ends.push_back( cur );
        last = ev;
    }
    result.verdict = Verdict::pass;
    result.carrier = sorted( ends );
    result.evidence = last;
    if ( !from.empty() )
        result.detail = "ends in " + m.format_state( space.states[ last.state ] );
    return result;
}

TaskResult eval_task( const volang::Task& task, const specml::CompiledMachine& m, const specml::StateSpace& space,
                      const Starts& starts )
{
    switch ( task.kind )
    {
    case volang::TaskKind::ltl:
        return eval_ltl( *task.ltl, m, space, starts );
    case volang::TaskKind::inv:
        return eval_inv( *task.predicate, m, space, starts );
    case volang::TaskKind::exists:
        return eval_exists( *task.predicate, m, space, starts );
    case volang::TaskKind::trace:
        return eval_trace( *task.scenario, m, space, starts );
    }
    return {};
}

NodeResult eval_vo( const volang::VOExpr& expr, const specml::CompiledMachine& m, const specml::StateSpace& space,
                    const Starts& starts )
{
    NodeResult out;
    out.kind = expr.kind;
    switch ( expr.kind )
    {
    case volang::NodeKind::task:
        out.task = eval_task( *expr.task, m, space, starts );
        out.verdict = out.task->verdict;
        out.carrier = out.task->carrier;
        return out;
    case volang::NodeKind::and_:
    case volang::NodeKind::or_:
    {
        auto a = eval_vo( expr.children[ 0 ], m, space, starts );
        auto b = eval_vo( expr.children[ 1 ], m, space, starts );
        bool conj = expr.kind == volang::NodeKind::and_;
        out.verdict = conj ? kleene_and( a.verdict, b.verdict ) : kleene_or( a.verdict, b.verdict );
        if ( conj )
            out.carrier = out.verdict == Verdict::pass ? intersect( a.carrier, b.carrier ) : std::vector< std::uint32_t >{};
        else
            out.carrier = unite( a.verdict == Verdict::pass ? a.carrier : std::vector< std::uint32_t >{},
                                 b.verdict == Verdict::pass ? b.carrier : std::vector< std::uint32_t >{} );
        out.children.push_back( std::move( a ) );
        out.children.push_back( std::move( b ) );
        return out;
    }
    case volang::NodeKind::seq:
    {
        auto a = eval_vo( expr.children[ 0 ], m, space, starts );
        if ( a.verdict != Verdict::pass || a.carrier.empty() )
        {
            out.verdict = a.verdict;
            if ( a.verdict == Verdict::pass )
            {
                out.verdict = Verdict::inconclusive;
                out.error = make_error( "E-ENG-020", "left operand of ';' handed over no states", expr.span );
            }
            NodeResult skipped;
            skipped.kind = expr.children[ 1 ].kind;
            skipped.evaluated = false;
            out.children.push_back( std::move( a ) );
            out.children.push_back( std::move( skipped ) );
            return out;
        }
        auto b = eval_vo( expr.children[ 1 ], m, space, a.carrier );
        out.verdict = b.verdict;
        out.carrier = b.carrier;
        out.children.push_back( std::move( a ) );
        out.children.push_back( std::move( b ) );
        return out;
    }
    }
    return out;
}

std::optional< std::vector< specml::State > > replay_run( const specml::CompiledMachine& m,
                                                          const specml::StateSpace& space, const Evidence& ev )
{
    // The start must come out of INITIALISATION.
    const specml::State& start = space.states.at( ev.start );
    auto inits = specml::initial_steps( m );
    if ( std::ranges::none_of( inits, [&]( const auto& st ) { return st.target == start; } ) )
        return std::nullopt;
    std::vector< specml::State > states{ start };
    auto step = [&]( std::uint32_t id ) {
        const specml::State& cur = states.back();
        if ( id == stutter )
        {
            if ( !specml::successors( m, cur ).empty() )
                return false;
            states.push_back( cur );
            return true;
        }
        if ( id >= space.transitions.size() )
            return false;
        const auto& t = space.transitions[ id ];
        if ( space.states[ t.source ] != cur )
            return false;
        const auto& event = m.events.at( t.event );
        if ( !specml::enabled( m, event, t.binding, cur ) )
            return false;
        states.push_back( specml::apply( m, event, t.binding, cur ) );
        return states.back() == space.states[ t.target ];
    };
    try
    {
        for ( auto id : ev.stem )
            if ( !step( id ) )
                return std::nullopt;
        for ( auto id : ev.cycle )
            if ( !step( id ) )
                return std::nullopt;
    }
    catch ( const specml::EvalError& )
    {
        return std::nullopt;
    }
    return states;
}

std::optional< std::string > check_evidence( const volang::Task& task, const TaskResult& result,
                                             const specml::CompiledMachine& m, const specml::StateSpace& space )
{
    const Evidence& ev = result.evidence;
    if ( ev.kind == Evidence::Kind::none )
        return std::nullopt;
    auto run = replay_run( m, space, ev );
    if ( !run )
        return "evidence does not replay";
    const specml::State& end = ev.cycle.empty() ? run->back() : ( *run )[ ev.stem.size() ];
    if ( ev.kind != Evidence::Kind::lasso && end != space.states[ ev.state ] )
        return "evidence ends in a different state";
    try
    {
        switch ( task.kind )
        {
        case volang::TaskKind::ltl:
        {
            if ( ev.kind != Evidence::Kind::lasso )
                return std::nullopt;
            // Cycle must close on the state where it started.
            if ( run->back() != ( *run )[ ev.stem.size() ] )
                return "lasso cycle does not close";
            std::vector< specml::State > positions( run->begin() + static_cast< std::ptrdiff_t >( ev.prefix ),
                                                    run->end() - 1 );
            bool holds = holds_on_lasso( *task.ltl, m, positions, ev.stem.size() - ev.prefix );
            if ( holds == ( result.verdict == Verdict::fail ) )
                return "formula value on the lasso disagrees with the verdict";
            return std::nullopt;
        }
        case volang::TaskKind::inv:
        case volang::TaskKind::exists:
        {
            if ( result.error )
                return std::nullopt;
            bool holds = specml::holds( specml::compile_predicate( m, *task.predicate, false ), end );
            bool expect = task.kind == volang::TaskKind::exists ? result.verdict == Verdict::pass
                                                                 : result.verdict != Verdict::fail;
            if ( holds != expect )
                return "predicate value at the evidence state disagrees with the verdict";
            return std::nullopt;
        }
        case volang::TaskKind::trace:
        {
            std::size_t done = ev.stem.size() - ev.prefix;
            const auto& steps = task.scenario->steps;
            if ( result.verdict == Verdict::fail && done < steps.size() )
            {
                const auto& st = steps[ done ];
                const auto& event = m.events.at( static_cast< std::size_t >( m.event_index( st.event ) ) );
                if ( specml::enabled( m, event, volang::binding_index( m, event, st ), end ) )
                    return "failing step is enabled on replay";
                return std::nullopt;
            }
            if ( done != steps.size() )
                return "trace length differs from the scenario";
            for ( std::size_t i = 0; i < done; ++i )
            {
                const auto& t = space.transitions[ ev.stem[ ev.prefix + i ] ];
                if ( m.events[ t.event ].name != steps[ i ].event )
                    return "trace event differs from the scenario";
            }
            bool holds = !task.scenario->final
                      || specml::holds( specml::compile_predicate( m, *task.scenario->final, false ), end );
            if ( holds != ( result.verdict == Verdict::pass ) )
                return "final predicate disagrees with the verdict";
            return std::nullopt;
        }
        }
    }
    catch ( const Error& e )
    {
        return std::string{ "replay raised " } + e.code();
    }
    return std::nullopt;
}

std::string format_steps( const specml::CompiledMachine& m, const specml::StateSpace& space,
                          std::span< const std::uint32_t > steps )
{
    std::string out;
    for ( std::size_t i = 0; i < steps.size(); ++i )
    {
        if ( i )
            out += ", ";
        if ( steps[ i ] == stutter )
        {
            out += "(stutter)";
            continue;
        }
        const auto& t = space.transitions[ steps[ i ] ];
        out += step_text( m, m.events[ t.event ], t.binding );
    }
    return out;
}

std::string format_evidence( const specml::CompiledMachine& m, const specml::StateSpace& space,
                             const Evidence& ev )
{
    switch ( ev.kind )
    {
    case Evidence::Kind::none:
        return {};
    case Evidence::Kind::lasso:
        return "stem [" + format_steps( m, space, ev.stem ) + "] cycle [" + format_steps( m, space, ev.cycle ) + "]";
    case Evidence::Kind::trace:
    case Evidence::Kind::state:
        return "trace [" + format_steps( m, space, ev.stem ) + "] -> " + m.format_state( space.states[ ev.state ] );
    }
    return {};
}

} // namespace vdd::engine
