#pragma once

#include "tock/check.hpp"
#include "tock/lts.hpp"

#include <vector>

namespace tock {

// Two-level compilation for large parallel compositions. The term-level
// engine in lts.hpp interns one term per reachable state, which is the right
// tool for components but costs hundreds of bytes per state; compositions of
// a dozen processes reach tens of millions of states and do not fit. Here the
// composition tree is split once: every maximal subterm that is not itself a
// parallel, hiding, projection, renaming or priority operator becomes a
// component compiled to its own small transition system, and the composition
// is explored over tuples of component state numbers (a few dozen bytes per
// state, no interning of product terms).

struct flat_node {
    enum kind_t : uint8_t { leaf, par, hide_op, project_op, rename_op, prio };
    kind_t kind;
    // leaf: a = component slot. par: a = left node, b = sync event set,
    // c = right node. hide_op/project_op: a = child, b = event set.
    // rename_op: a = child, b = relation. prio: a = child.
    uint32_t a = 0, b = 0, c = 0;
    // Component slots covered by this subtree (contiguous by construction).
    uint32_t comp_lo = 0, comp_hi = 0;
};

struct flat_system {
    std::vector<lts> leaf_systems;   // distinct component systems
    std::vector<uint32_t> comp_leaf; // component slot -> leaf_systems index
    std::vector<flat_node> nodes;    // composition operators above the leaves
    uint32_t root = 0;
    term_id source = k_invalid; // the term this was flattened from

    uint32_t components() const { return uint32_t(comp_leaf.size()); }
};

// Splits a composition into components and operator tree. Recurses through
// parallel, hide, project, rename and timed-priority nodes; anything else is
// compiled as a component with the term-level engine (leaf_lim bounds those
// compilations). Component systems keep the term engine's collapsing of
// deterministic internal steps; under a top-level maximal-progress operator
// (which every system checked here has) that collapse preserves timed traces
// and quiescence, because an unopposed internal step can neither be refused
// nor delayed by the rest of the composition.
flat_system flatten_composition(stepper& st, term_id root,
                                const exploration_limits& leaf_lim = {});

// Explores the synchronized product and materializes it in the same
// compressed-row form compile_lts produces, with identical layer-by-layer
// state numbering for every thread count. state_term holds k_invalid for
// product states (they are tuples, not terms); the post-termination state,
// when one exists, is the exception and is marked with the terminated term so
// quiescence checks exempt it.
lts compile_lts_product(context& ctx, const flat_system& fs,
                        const exploration_limits& lim = {});

// Traces refinement checked against the product on the fly: product states
// are paired with states of the determinized specification during the breadth
// first walk and the implementation system is never materialized. Verdict and
// counterexample match check_traces_refinement on the compiled product; the
// counterexample has minimal observable length and is identical for every
// thread count. lim.max_states bounds the number of product pairs.
check_outcome check_traces_refinement_product(context& ctx, const flat_system& impl,
                                              const dlts& spec,
                                              const exploration_limits& lim = {});

} // namespace tock
