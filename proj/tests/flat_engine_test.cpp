// The tuple-state product engine must agree with the term-level engine on
// structure, verdicts and counterexamples; these fixtures are small enough to
// run both and compare.

#include "tock/flat_compose.hpp"
#include "tock/parse.hpp"

#include <gtest/gtest.h>

#include <optional>
#include <string>
#include <vector>

using namespace tock;

namespace {

struct flat_engine : ::testing::Test {
    context c;
    stepper st{c};

    parsed_module mod(const std::string& src) { return parse_process_text(c, src); }

    // Trace-equivalence via two refinement checks, one per direction.
    void expect_trace_equivalent(const lts& a, const lts& b) {
        EXPECT_EQ(check_traces_refinement(a, determinize(b)).result, check_result::pass);
        EXPECT_EQ(check_traces_refinement(b, determinize(a)).result, check_result::pass);
    }
};

// Two single-place buffers chained over a shared middle channel, the middle
// hidden, everything under maximal progress. Small, but it exercises sync,
// hiding and priority in one tree.
constexpr const char* k_chain_src = R"(
    channel left : {0..1}
    channel mid : {0..1}
    channel right : {0..1}
    Cell1 = left?x -> mid!x -> Cell1
    Cell2 = mid?x -> right!x -> Cell2
    Chain = TP((Cell1 [| {mid} |] Cell2) \ {mid})
)";

TEST_F(flat_engine, a_lone_process_flattens_to_one_component) {
    parsed_module m = mod("channel a\nP = a -> P\n");
    term_id root = instantiate(c, m, "P");
    flat_system fs = flatten_composition(st, root);
    EXPECT_EQ(fs.components(), 1u);
    EXPECT_EQ(fs.leaf_systems.size(), 1u);
    EXPECT_EQ(fs.source, root);

    lts product = compile_lts_product(c, fs);
    lts direct = compile_lts(st, root);
    EXPECT_EQ(product.num_states(), direct.num_states());
    expect_trace_equivalent(product, direct);
}

TEST_F(flat_engine, flattening_splits_a_composition_into_components) {
    parsed_module m = mod(k_chain_src);
    flat_system fs = flatten_composition(st, instantiate(c, m, "Chain"));
    EXPECT_EQ(fs.components(), 2u);
    EXPECT_EQ(fs.leaf_systems.size(), 2u);
    // Operator tree: two leaves under parallel, hide, priority.
    ASSERT_FALSE(fs.nodes.empty());
    EXPECT_EQ(fs.nodes[fs.root].kind, flat_node::prio);
}

TEST_F(flat_engine, equal_components_share_one_compiled_system) {
    parsed_module m = mod("channel a : {0..2}\nP = a?x -> P\nPair = P ||| P\n");
    flat_system fs = flatten_composition(st, instantiate(c, m, "Pair"));
    EXPECT_EQ(fs.components(), 2u);
    EXPECT_EQ(fs.leaf_systems.size(), 1u);
    EXPECT_EQ(fs.comp_leaf[0], fs.comp_leaf[1]);
}

TEST_F(flat_engine, product_states_are_tuples_not_terms) {
    parsed_module m = mod(k_chain_src);
    flat_system fs = flatten_composition(st, instantiate(c, m, "Chain"));
    lts product = compile_lts_product(c, fs);
    uint64_t tagged = 0;
    for (term_id t : product.state_term) tagged += (t != k_invalid) ? 1 : 0;
    EXPECT_EQ(tagged, 0u); // nothing terminates here, so no post-Term state
}

TEST_F(flat_engine, both_engines_build_the_same_state_graph) {
    parsed_module m = mod(k_chain_src);
    term_id root = instantiate(c, m, "Chain");
    lts direct = compile_lts(st, root);
    flat_system fs = flatten_composition(st, root);
    lts product = compile_lts_product(c, fs);
    expect_trace_equivalent(direct, product);
    EXPECT_EQ(check_timed_deadlock_free(direct, c).result,
              check_timed_deadlock_free(product, c).result);
}

TEST_F(flat_engine, both_engines_report_the_same_violation) {
    // The chain takes one tick per hop; a spec demanding output in the input
    // instant is refuted, and the refusal must be identical in both engines.
    parsed_module m = mod(R"(
        channel left : {0..1}
        channel mid : {0..1}
        channel right : {0..1}
        Cell1 = left?x -> mid!x -> Cell1
        Cell2 = mid?x -> right!x -> Cell2
        Chain = TP((Cell1 [| {mid} |] Cell2) \ {mid})
        Immediate = left?x -> right!x -> Immediate
    )");
    term_id root = instantiate(c, m, "Chain");
    dlts spec = determinize(compile_lts(st, instantiate(c, m, "Immediate")));

    check_outcome direct = check_traces_refinement(compile_lts(st, root), spec);
    flat_system fs = flatten_composition(st, root);
    check_outcome flat = check_traces_refinement_product(c, fs, spec);

    ASSERT_EQ(direct.result, check_result::fail);
    ASSERT_EQ(flat.result, check_result::fail);
    EXPECT_EQ(flat.cex->trace, direct.cex->trace);
    EXPECT_EQ(flat.cex->violating, direct.cex->violating);

    // And the shared counterexample replays on the composition term.
    std::vector<label_id> full = flat.cex->trace;
    full.push_back(flat.cex->violating);
    EXPECT_TRUE(replay_trace(st, root, full));
}

TEST_F(flat_engine, product_numbering_is_identical_for_every_thread_count) {
    parsed_module m = mod(k_chain_src);
    flat_system fs = flatten_composition(st, instantiate(c, m, "Chain"));
    std::optional<lts> base;
    for (unsigned threads : {1u, 4u, 8u}) {
        exploration_limits lim;
        lim.threads = threads;
        lts product = compile_lts_product(c, fs, lim);
        if (!base) {
            base = std::move(product);
            continue;
        }
        EXPECT_EQ(product.row, base->row);
        EXPECT_EQ(product.state_term, base->state_term);
        ASSERT_EQ(product.edges.size(), base->edges.size());
        for (size_t i = 0; i < product.edges.size(); ++i) {
            EXPECT_EQ(product.edges[i].label, base->edges[i].label);
            EXPECT_EQ(product.edges[i].dst, base->edges[i].dst);
        }
    }
}

TEST_F(flat_engine, on_the_fly_verdicts_match_for_every_thread_count) {
    parsed_module m = mod(k_chain_src);
    term_id root = instantiate(c, m, "Chain");
    dlts spec = determinize(compile_lts(st, root));
    flat_system fs = flatten_composition(st, root);
    for (unsigned threads : {1u, 4u, 8u}) {
        exploration_limits lim;
        lim.threads = threads;
        EXPECT_EQ(check_traces_refinement_product(c, fs, spec, lim).result,
                  check_result::pass);
    }
}

TEST_F(flat_engine, termination_of_the_whole_composition_is_exempt_quiescence) {
    parsed_module m = mod(R"(
        channel a
        Left = a -> SKIP
        Right = a -> SKIP
        Both = TP(Left [| {a} |] Right)
    )");
    flat_system fs = flatten_composition(st, instantiate(c, m, "Both"));
    lts product = compile_lts_product(c, fs);
    // The terminated state is the one marked state, and it is not a deadlock.
    uint64_t tagged = 0;
    for (term_id t : product.state_term) tagged += (t != k_invalid) ? 1 : 0;
    EXPECT_EQ(tagged, 1u);
    EXPECT_EQ(check_timed_deadlock_free(product, c).result, check_result::pass);
}

TEST_F(flat_engine, a_tight_state_budget_throws_instead_of_guessing) {
    parsed_module m = mod(k_chain_src);
    term_id root = instantiate(c, m, "Chain");
    flat_system fs = flatten_composition(st, root);
    exploration_limits lim;
    lim.max_states = 2;
    EXPECT_THROW(compile_lts_product(c, fs, lim), bound_exceeded);
    dlts spec = determinize(compile_lts(st, root));
    EXPECT_THROW(check_traces_refinement_product(c, fs, spec, lim), bound_exceeded);
}

} // namespace
