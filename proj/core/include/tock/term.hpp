#pragma once

#include "tock/expr.hpp"

#include <cstdint>

namespace tock {

using term_id = uint32_t;
using set_id = uint32_t;
using rel_id = uint32_t;
using def_id = uint32_t;
using value_id = uint32_t;

// Process-term operators. The first block mirrors the surface operator set of
// the modelling language; the second block holds internal forms produced by
// the kernel itself (omega = terminated, trun = run-on-event-set, the cell
// nodes implement the asynchronous platform-boundary buffers).
enum class term_op : uint8_t {
    skip,
    stop,
    ustop,
    wait,
    prefix_out,
    prefix_in,
    cond,
    ext_choice,
    seq,
    hide,
    project,
    parallel,
    rename_t,
    interrupt,
    exception,
    call,
    timed_priority,
    // internal forms
    omega,
    trun,
    cell,
    presence_cell,
};

// Interned term node. Fields by op:
//   wait:        a = remaining ticks (>= 1; wait(0) normalizes to skip)
//   prefix_out:  a = chan, b = value expr, c = continuation
//   prefix_in:   a = chan, b = predicate expr or k_invalid, c = continuation
//                (continuation sees the received value as de Bruijn var 0)
//   cond:        a = guard expr, b = then, c = else (guard always open; a
//                closed guard is resolved when the node is built)
//   ext_choice:  a = child arena offset, b = child count (children sorted)
//   seq:         a = left, b = right
//   hide:        a = term, b = event set
//   project:     a = term, b = kept event set
//   parallel:    a = left, b = sync event set, c = right (children sorted)
//   rename_t:    a = term, b = relation
//   interrupt:   a = body, b = handler
//   exception:   a = body, b = throw set, c = handler
//   call:        a = def, b = arg expr arena offset, c = arg count
//   timed_priority: a = term
//   trun:        a = event set
//   cell:        a = write chan, b = read chan, c = cell state arena index
//   presence_cell: a = write chan, b = read chan, c = flags (1 = full, 2 = open)
struct term_node {
    term_op op;
    uint16_t nfree = 0;
    uint32_t a = 0, b = 0, c = 0;

    bool operator==(const term_node& o) const {
        return op == o.op && a == o.a && b == o.b && c == o.c;
    }
};

constexpr uint32_t k_cell_open = 2;
constexpr uint32_t k_cell_full = 1;

} // namespace tock
