#pragma once

#include "tock/context.hpp"

#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

namespace tock {

struct transition {
    label_id label;
    term_id target;
    bool operator==(const transition& o) const { return label == o.label && target == o.target; }
    bool operator<(const transition& o) const {
        return label != o.label ? label < o.label : target < o.target;
    }
};

// Computes the outgoing transitions of closed process terms under the timed
// operational semantics. Results are memoized per term (subterm reuse across
// states of a product or parallel composition is the dominant saving); the
// cache can be bounded for very large explorations and is safe to query from
// several threads at once.
class stepper {
  public:
    explicit stepper(context& ctx) : ctx_(ctx) {}
    stepper(const stepper&) = delete;
    stepper& operator=(const stepper&) = delete;

    // Deterministically ordered (by label then target) successor list. The
    // returned pointer stays valid across cache eviction.
    using succ_list = std::shared_ptr<const std::vector<transition>>;
    succ_list successors(term_id t);

    std::vector<label_id> initials(term_id t);
    std::vector<term_id> step(term_id t, label_id l);
    // True when the term has a Term-labelled transition (it may terminate now).
    bool may_terminate(term_id t);

    // Drop the whole cache once it exceeds this many entries (0 = unbounded).
    void set_cache_limit(size_t n) { cache_limit_ = n; }
    size_t cache_size() const;

    context& ctx() { return ctx_; }

  private:
    std::vector<transition> compute(term_id t);
    void tock_targets(const std::vector<transition>& succ, std::vector<term_id>& out) const;

    context& ctx_;
    mutable std::mutex mu_;
    std::unordered_map<term_id, succ_list> memo_;
    size_t cache_limit_ = 0;
};

} // namespace tock
