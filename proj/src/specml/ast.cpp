#include "vdd/specml/ast.hpp"

#include <algorithm>

namespace vdd::specml
{

Expr Expr::integer( std::int64_t v, Span span )
{
    Expr e;
    e.kind = ExprKind::integer;
    e.value = v;
    e.span = span;
    return e;
}

Expr Expr::boolean( bool b, Span span )
{
    Expr e;
    e.kind = ExprKind::boolean;
    e.value = b ? 1 : 0;
    e.span = span;
    return e;
}

Expr Expr::identifier( std::string name, Span span )
{
    Expr e;
    e.kind = ExprKind::identifier;
    e.op = std::move( name );
    e.span = span;
    return e;
}

Expr Expr::unary( std::string op, Expr operand, Span span )
{
    Expr e;
    e.kind = ExprKind::unary;
    e.op = std::move( op );
    e.args.push_back( std::move( operand ) );
    e.span = span;
    return e;
}

Expr Expr::binary( std::string op, Expr lhs, Expr rhs, Span span )
{
    Expr e;
    e.kind = ExprKind::binary;
    e.op = std::move( op );
    e.args.push_back( std::move( lhs ) );
    e.args.push_back( std::move( rhs ) );
    e.span = span;
    return e;
}

bool same( const Expr& a, const Expr& b )
{
    if ( a.kind != b.kind || a.op != b.op || a.value != b.value || a.bound != b.bound
         || a.args.size() != b.args.size() )
        return false;
    for ( std::size_t i = 0; i < a.args.size(); ++i )
        if ( !same( a.args[ i ], b.args[ i ] ) )
            return false;
    return true;
}

namespace
{

void collect( const Expr& e, bool pre, std::vector< std::string >& bound, std::vector< std::string >& out )
{
    auto is_bound = [ & ]( const std::string& n ) {
        return std::find( bound.begin(), bound.end(), n ) != bound.end();
    };
    switch ( e.kind )
    {
    case ExprKind::identifier:
        if ( !pre && !is_bound( e.op ) && std::find( out.begin(), out.end(), e.op ) == out.end() )
            out.push_back( e.op );
        return;
    case ExprKind::pre_identifier:
        if ( pre && std::find( out.begin(), out.end(), e.op ) == out.end() )
            out.push_back( e.op );
        return;
    case ExprKind::quantifier:
    {
        auto size = bound.size();
        bound.insert( bound.end(), e.bound.begin(), e.bound.end() );
        for ( const auto& arg : e.args )
            collect( arg, pre, bound, out );
        bound.resize( size );
        return;
    }
    default:
        for ( const auto& arg : e.args )
            collect( arg, pre, bound, out );
    }
}

} // namespace

std::vector< std::string > free_identifiers( const Expr& e, bool pre )
{
    std::vector< std::string > bound;
    std::vector< std::string > out;
    collect( e, pre, bound, out );
    return out;
}

bool mentions_pre_state( const Expr& e )
{
    if ( e.kind == ExprKind::pre_identifier )
        return true;
    return std::any_of( e.args.begin(), e.args.end(), []( const Expr& a ) { return mentions_pre_state( a ); } );
}

bool same( const DeclType& a, const DeclType& b )
{
    if ( a.kind != b.kind || a.name != b.name || a.bounds.size() != b.bounds.size()
         || a.parts.size() != b.parts.size() )
        return false;
    for ( std::size_t i = 0; i < a.bounds.size(); ++i )
        if ( !same( a.bounds[ i ], b.bounds[ i ] ) )
            return false;
    for ( std::size_t i = 0; i < a.parts.size(); ++i )
        if ( !same( a.parts[ i ], b.parts[ i ] ) )
            return false;
    return true;
}

namespace
{

template < typename T, typename F >
bool all_pairs( const std::vector< T >& a, const std::vector< T >& b, F eq )
{
    if ( a.size() != b.size() )
        return false;
    for ( std::size_t i = 0; i < a.size(); ++i )
        if ( !eq( a[ i ], b[ i ] ) )
            return false;
    return true;
}

bool same_event( const EventSpec& a, const EventSpec& b )
{
    return a.name == b.name
        && all_pairs( a.parameters, b.parameters,
                      []( const Parameter& x, const Parameter& y ) { return x.name == y.name && same( x.type, y.type ); } )
        && all_pairs( a.guards, b.guards, []( const Expr& x, const Expr& y ) { return same( x, y ); } )
        && all_pairs( a.actions, b.actions, []( const Assignment& x, const Assignment& y ) {
               return x.target == y.target && x.index.has_value() == y.index.has_value()
                   && ( !x.index || same( *x.index, *y.index ) ) && same( x.value, y.value );
           } );
}

} // namespace

bool same( const MachineSpec& a, const MachineSpec& b )
{
    return a.name == b.name && a.refines == b.refines && a.sees == b.sees && a.implements == b.implements
        && all_pairs( a.gluing, b.gluing,
                      []( const GluingNote& x, const GluingNote& y ) {
                          return x.variable == y.variable && x.text == y.text;
                      } )
        && all_pairs( a.variables, b.variables,
                      []( const VariableDecl& x, const VariableDecl& y ) {
                          return x.name == y.name && same( x.type, y.type );
                      } )
        && all_pairs( a.invariants, b.invariants,
                      []( const LabeledPredicate& x, const LabeledPredicate& y ) {
                          return x.label == y.label && same( x.predicate, y.predicate );
                      } )
        && all_pairs( a.events, b.events, same_event );
}

bool same( const ContextSpec& a, const ContextSpec& b )
{
    return a.name == b.name
        && all_pairs( a.sets, b.sets,
                      []( const CarrierDecl& x, const CarrierDecl& y ) {
                          return x.name == y.name && x.elements == y.elements;
                      } )
        && all_pairs( a.constants, b.constants, []( const ConstantDecl& x, const ConstantDecl& y ) {
               return x.name == y.name && same( x.value, y.value );
           } );
}

} // namespace vdd::specml
