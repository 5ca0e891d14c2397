#pragma once

#include "tock/semantics.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tock {

struct lts_edge {
    label_id label;
    uint32_t dst;
    bool operator==(const lts_edge& o) const { return label == o.label && dst == o.dst; }
};

struct lts_stats {
    uint64_t states = 0;
    uint64_t transitions = 0;
    double compile_seconds = 0.0;
};

// Raised when an exploration limit is hit; carries what was built so far.
class bound_exceeded : public kernel_error {
  public:
    bound_exceeded(const std::string& what, lts_stats partial)
        : kernel_error(what), partial(partial) {}
    lts_stats partial;
};

struct exploration_limits {
    uint64_t max_states = 200'000'000;
    uint64_t max_millis = 0; // 0 = no wall-clock bound
    unsigned threads = 1;
    bool tau_chase = true; // collapse deterministic single-tau chains
    // When set, exploration stops at the end of the first breadth-first layer
    // that produced an edge with this label. The result is a prefix of the
    // full system: sound for deciding that the label is reachable, nothing
    // else. The cut point depends only on the layer structure, so verdicts
    // are identical for every thread count.
    label_id stop_at_label = k_invalid;
};

// Explicit labelled transition system in compressed sparse row form. State 0
// is the initial state; states are numbered in breadth-first discovery order,
// which is identical for every thread count.
struct lts {
    std::vector<uint64_t> row; // size states+1
    std::vector<lts_edge> edges;
    std::vector<term_id> state_term;
    lts_stats stats;

    uint64_t num_states() const { return state_term.size(); }
    std::span<const lts_edge> out(uint32_t s) const {
        return {edges.data() + row[s], edges.data() + row[s + 1]};
    }
};

lts compile_lts(stepper& st, term_id root, const exploration_limits& lim = {});

// A process call with constant arguments is stepped transparently, so it and
// its unfolded body are one behaviour under two term ids. This follows call
// chains to the underlying operator term (throwing on an unguarded cycle such
// as P = P); the builders use it so equal behaviours share a state id, and it
// lets structural passes see the operator beneath a named-process reference.
term_id resolve_calls(stepper& st, term_id t);

// Deterministic automaton over observable labels (visible events, tock and
// termination), produced by subset construction with tau-closure. Edges of a
// state are sorted by label; at most one edge per label.
struct dlts {
    std::vector<uint64_t> row;
    std::vector<lts_edge> edges;

    uint64_t num_states() const { return row.empty() ? 0 : row.size() - 1; }
    std::span<const lts_edge> out(uint32_t s) const {
        return {edges.data() + row[s], edges.data() + row[s + 1]};
    }
    // Successor of s under label l, or k_invalid when the label is refused.
    uint32_t next(uint32_t s, label_id l) const;
};

dlts determinize(const lts& m, uint64_t max_states = 50'000'000);

// Human-readable adjacency listing and a machine-readable JSON document; the
// formats are documented in docs/lts-format.md.
std::string lts_to_text(const lts& m, const context& ctx);
std::string lts_to_json(const lts& m, const context& ctx);

} // namespace tock
