#pragma once

#include "tock/value.hpp"

#include <cstdint>

namespace tock {

using chan_id = uint32_t;
constexpr uint32_t k_invalid = 0xffffffffu;

// Transition labels. `tau` is an internal action, `term` is the internal
// termination signal produced by Skip and consumed by sequential composition
// (it never appears in traces), `tock` marks the passage of one discrete time
// unit, and `visible` is a regular channel communication.
enum class label_kind : uint8_t { tau, term, tock, visible };

struct event_label {
    label_kind kind = label_kind::tau;
    chan_id chan = k_invalid;
    value val;

    static event_label tau() { return {label_kind::tau, k_invalid, {}}; }
    static event_label term() { return {label_kind::term, k_invalid, {}}; }
    static event_label tock() { return {label_kind::tock, k_invalid, {}}; }
    static event_label visible(chan_id c, value v) {
        return {label_kind::visible, c, v};
    }

    bool is_internal() const {
        return kind == label_kind::tau || kind == label_kind::term;
    }
    bool operator==(const event_label& o) const {
        return kind == o.kind && chan == o.chan && val == o.val;
    }
};

// Dense label ids, interned per context. Fixed slots for the non-visible
// labels keep hot-path comparisons branch-free.
using label_id = uint32_t;
constexpr label_id k_label_tau = 0;
constexpr label_id k_label_term = 1;
constexpr label_id k_label_tock = 2;
constexpr label_id k_first_visible_label = 3;

inline bool label_is_internal(label_id l) { return l <= k_label_term; }
inline bool label_is_visible(label_id l) { return l >= k_first_visible_label; }

} // namespace tock
