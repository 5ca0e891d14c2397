#include "tock/flat_compose.hpp"

#include "tock/chunked_vector.hpp"
#include "tock/flat_index.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <memory>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

namespace tock {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration_cast<std::chrono::duration<double>>(
               std::chrono::steady_clock::now() - t0)
        .count();
}

// ---------------------------------------------------------------------------
// Flattening

struct flatten_ctx {
    stepper& st;
    const exploration_limits& leaf_lim;
    flat_system out;
    std::vector<std::pair<term_id, uint32_t>> leaf_ids; // term -> leaf_systems index
};

uint32_t walk(flatten_ctx& fc, term_id t) {
    context& c = fc.st.ctx();
    // See through named-process references so a composition written as
    // definitions (System = A [| ... |] B) splits like the inline term would.
    t = resolve_calls(fc.st, t);
    const term_node& n = c.term(t);
    flat_node node;
    node.comp_lo = fc.out.components();
    switch (n.op) {
    case term_op::parallel: {
        node.kind = flat_node::par;
        node.a = walk(fc, n.a);
        node.b = n.b;
        node.c = walk(fc, n.c);
        break;
    }
    case term_op::hide:
        node.kind = flat_node::hide_op;
        node.a = walk(fc, n.a);
        node.b = n.b;
        break;
    case term_op::project:
        node.kind = flat_node::project_op;
        node.a = walk(fc, n.a);
        node.b = n.b;
        break;
    case term_op::rename_t:
        node.kind = flat_node::rename_op;
        node.a = walk(fc, n.a);
        node.b = n.b;
        break;
    case term_op::timed_priority:
        node.kind = flat_node::prio;
        node.a = walk(fc, n.a);
        break;
    default: {
        node.kind = flat_node::leaf;
        uint32_t leaf = k_invalid;
        for (const auto& [seen, idx] : fc.leaf_ids)
            if (seen == t) leaf = idx;
        if (leaf == k_invalid) {
            exploration_limits ll = fc.leaf_lim;
            ll.threads = 1;
            ll.stop_at_label = k_invalid;
            leaf = uint32_t(fc.out.leaf_systems.size());
            fc.out.leaf_systems.push_back(compile_lts(fc.st, t, ll));
            fc.leaf_ids.push_back({t, leaf});
        }
        node.a = fc.out.components();
        fc.out.comp_leaf.push_back(leaf);
        break;
    }
    }
    node.comp_hi = fc.out.components();
    fc.out.nodes.push_back(node);
    return uint32_t(fc.out.nodes.size() - 1);
}

// ---------------------------------------------------------------------------
// Product generation

// Label classification tables per operator node, sized to cover every label a
// component or a renaming can produce. Built once, read concurrently.
struct gen_tables {
    std::vector<uint8_t> width;    // bytes per component in the packed tuple
    std::vector<uint32_t> offset;  // byte offset per component
    std::vector<uint32_t> sentinel; // per component: its post-termination state
    uint32_t tuple_bytes = 0;
    std::vector<uint8_t> omega_tuple; // every component at its sentinel

    uint32_t max_label = 0;
    std::vector<std::vector<uint8_t>> in_set; // par: sync, hide: hidden, project: kept
    std::vector<uint8_t> keep_tock;           // project nodes
    std::vector<std::vector<std::vector<label_id>>> ren; // rename fanout (empty = keep)
};

gen_tables build_tables(context& ctx, const flat_system& fs) {
    gen_tables g;
    uint32_t comps = fs.components();
    g.width.resize(comps);
    g.offset.resize(comps);
    g.sentinel.resize(comps);
    uint32_t off = 0;
    for (uint32_t i = 0; i < comps; ++i) {
        uint64_t states = fs.leaf_systems[fs.comp_leaf[i]].num_states();
        g.sentinel[i] = uint32_t(states);
        g.width[i] = states + 1 <= 0xFF ? 1 : states + 1 <= 0xFFFF ? 2 : 4;
        g.offset[i] = off;
        off += g.width[i];
    }
    g.tuple_bytes = off;

    // Every label any component can emit, closed under the renamings.
    std::set<label_id> labels{k_label_tau, k_label_term, k_label_tock};
    for (const lts& m : fs.leaf_systems)
        for (const lts_edge& e : m.edges) labels.insert(e.label);
    for (bool grew = true; grew;) {
        grew = false;
        for (const flat_node& n : fs.nodes) {
            if (n.kind != flat_node::rename_op) continue;
            std::vector<label_id> images;
            for (label_id l : labels) {
                if (!label_is_visible(l)) continue;
                for (chan_id to : ctx.rename_targets(n.b, ctx.label_channel(l)))
                    images.push_back(ctx.label(to, ctx.label_value(l)));
            }
            for (label_id l : images)
                if (labels.insert(l).second) grew = true;
        }
    }
    g.max_label = *labels.rbegin();

    g.in_set.resize(fs.nodes.size());
    g.keep_tock.assign(fs.nodes.size(), 0);
    g.ren.resize(fs.nodes.size());
    for (size_t k = 0; k < fs.nodes.size(); ++k) {
        const flat_node& n = fs.nodes[k];
        if (n.kind == flat_node::par || n.kind == flat_node::hide_op ||
            n.kind == flat_node::project_op) {
            g.in_set[k].assign(g.max_label + 1, 0);
            for (label_id l : labels)
                if (label_is_visible(l) && ctx.label_in_set(l, n.b)) g.in_set[k][l] = 1;
            if (n.kind == flat_node::project_op)
                g.keep_tock[k] = ctx.set_info(n.b).has_tock ? 1 : 0;
        } else if (n.kind == flat_node::rename_op) {
            g.ren[k].resize(g.max_label + 1);
            for (label_id l : labels) {
                if (!label_is_visible(l)) continue;
                for (chan_id to : ctx.rename_targets(n.b, ctx.label_channel(l)))
                    g.ren[k][l].push_back(ctx.label(to, ctx.label_value(l)));
            }
        }
    }

    g.omega_tuple.assign(g.tuple_bytes, 0);
    for (uint32_t i = 0; i < comps; ++i) {
        uint32_t v = g.sentinel[i];
        std::memcpy(g.omega_tuple.data() + g.offset[i], &v, g.width[i]);
    }
    return g;
}

// Per-node move buffer: labels plus node-local state slices, kept sorted by
// (label, slice) so synchronization joins are linear merges.
struct node_buf {
    std::vector<label_id> lab;
    std::vector<uint32_t> st; // lab.size() * node_width entries
};

struct gen_scratch {
    std::vector<node_buf> buf;
    node_buf tmp;
    std::vector<uint32_t> perm;
    std::vector<uint32_t> cur;               // unpacked component states
    std::vector<std::vector<uint8_t>> trail; // chase cycle guard
    std::vector<uint8_t> bytes;              // packed tuple scratch
};

class product_gen {
  public:
    product_gen(const flat_system& fs, gen_tables&& tables)
        : fs_(fs), g_(std::move(tables)) {}

    const gen_tables& tables() const { return g_; }
    uint32_t tuple_bytes() const { return g_.tuple_bytes; }

    gen_scratch make_scratch() const {
        gen_scratch s;
        s.buf.resize(fs_.nodes.size());
        s.cur.resize(fs_.components());
        s.bytes.resize(g_.tuple_bytes);
        return s;
    }

    void pack(const uint32_t* cur, uint8_t* out) const {
        for (uint32_t i = 0; i < fs_.components(); ++i)
            std::memcpy(out + g_.offset[i], &cur[i], g_.width[i]);
    }
    void unpack(const uint8_t* in, uint32_t* cur) const {
        for (uint32_t i = 0; i < fs_.components(); ++i) {
            uint32_t v = 0;
            std::memcpy(&v, in + g_.offset[i], g_.width[i]);
            cur[i] = v;
        }
    }

    // Fills s.buf[root] with the moves of the packed tuple in s.bytes.
    const node_buf& generate(gen_scratch& s) const {
        unpack(s.bytes.data(), s.cur.data());
        eval(fs_.root, s);
        return s.buf[fs_.root];
    }

    // Follows unopposed internal steps to their end, mirroring the term-level
    // engine's collapse of deterministic internal chains.
    void chase(gen_scratch& s) const {
        s.trail.clear();
        for (;;) {
            const node_buf& mv = generate(s);
            if (mv.lab.size() != 1 || mv.lab[0] != k_label_tau) return;
            std::vector<uint8_t> next(g_.tuple_bytes);
            uint32_t w = width(fs_.root);
            std::vector<uint32_t> full(s.cur);
            for (uint32_t i = 0; i < w; ++i) full[fs_.nodes[fs_.root].comp_lo + i] = mv.st[i];
            pack(full.data(), next.data());
            for (const auto& seen : s.trail)
                if (seen == next) return;
            s.trail.push_back(s.bytes);
            s.bytes = next;
        }
    }

  private:
    uint32_t width(uint32_t k) const {
        return fs_.nodes[k].comp_hi - fs_.nodes[k].comp_lo;
    }

    void emit(node_buf& out, label_id l) const { out.lab.push_back(l); }

    void eval(uint32_t k, gen_scratch& s) const;
    void canonicalize(node_buf& b, uint32_t w, gen_scratch& s) const;

    const flat_system& fs_;
    gen_tables g_;
};

void product_gen::canonicalize(node_buf& b, uint32_t w, gen_scratch& s) const {
    size_t n = b.lab.size();
    if (n < 2) return;
    s.perm.resize(n);
    std::iota(s.perm.begin(), s.perm.end(), 0u);
    auto less = [&](uint32_t x, uint32_t y) {
        if (b.lab[x] != b.lab[y]) return b.lab[x] < b.lab[y];
        return std::lexicographical_compare(b.st.begin() + size_t(x) * w,
                                            b.st.begin() + size_t(x + 1) * w,
                                            b.st.begin() + size_t(y) * w,
                                            b.st.begin() + size_t(y + 1) * w);
    };
    std::sort(s.perm.begin(), s.perm.end(), less);
    node_buf& t = s.tmp;
    t.lab.clear();
    t.st.clear();
    for (size_t i = 0; i < n; ++i) {
        uint32_t p = s.perm[i];
        if (!t.lab.empty() && t.lab.back() == b.lab[p] &&
            std::equal(b.st.begin() + size_t(p) * w, b.st.begin() + size_t(p + 1) * w,
                       t.st.end() - w))
            continue; // duplicate move
        t.lab.push_back(b.lab[p]);
        t.st.insert(t.st.end(), b.st.begin() + size_t(p) * w,
                    b.st.begin() + size_t(p + 1) * w);
    }
    std::swap(b.lab, t.lab);
    std::swap(b.st, t.st);
}

void product_gen::eval(uint32_t k, gen_scratch& s) const {
    const flat_node& n = fs_.nodes[k];
    node_buf& out = s.buf[k];
    out.lab.clear();
    out.st.clear();
    const uint32_t w = width(k);

    auto push_sentinels = [&] {
        for (uint32_t i = n.comp_lo; i < n.comp_hi; ++i) out.st.push_back(g_.sentinel[i]);
    };

    switch (n.kind) {
    case flat_node::leaf: {
        uint32_t comp = n.a;
        uint32_t local = s.cur[comp];
        const lts& m = fs_.leaf_systems[fs_.comp_leaf[comp]];
        if (local == g_.sentinel[comp]) { // post-termination: time may pass
            emit(out, k_label_tock);
            out.st.push_back(local);
            break;
        }
        for (const lts_edge& e : m.out(local)) {
            emit(out, e.label);
            out.st.push_back(e.label == k_label_term ? g_.sentinel[comp] : e.dst);
        }
        break; // component rows are already sorted and deduplicated
    }

    case flat_node::par: {
        eval(n.a, s);
        eval(n.c, s);
        const node_buf& L = s.buf[n.a];
        const node_buf& R = s.buf[n.c];
        const flat_node& ln = fs_.nodes[n.a];
        const flat_node& rn = fs_.nodes[n.c];
        const uint32_t lw = ln.comp_hi - ln.comp_lo;
        const uint32_t rw = rn.comp_hi - rn.comp_lo;
        const std::vector<uint8_t>& sync = g_.in_set[k];
        bool lterm = false, rterm = false;

        auto append_left = [&](size_t i) { // left moves, right side stays put
            emit(out, L.lab[i]);
            out.st.insert(out.st.end(), L.st.begin() + i * lw, L.st.begin() + (i + 1) * lw);
            for (uint32_t c2 = rn.comp_lo; c2 < rn.comp_hi; ++c2) out.st.push_back(s.cur[c2]);
        };
        auto append_right = [&](size_t j) {
            emit(out, R.lab[j]);
            for (uint32_t c2 = ln.comp_lo; c2 < ln.comp_hi; ++c2) out.st.push_back(s.cur[c2]);
            out.st.insert(out.st.end(), R.st.begin() + j * rw, R.st.begin() + (j + 1) * rw);
        };

        for (size_t i = 0; i < L.lab.size(); ++i) {
            label_id l = L.lab[i];
            if (l == k_label_term) lterm = true;
            else if (l == k_label_tau || (label_is_visible(l) && !sync[l])) append_left(i);
        }
        for (size_t j = 0; j < R.lab.size(); ++j) {
            label_id l = R.lab[j];
            if (l == k_label_term) rterm = true;
            else if (l == k_label_tau || (label_is_visible(l) && !sync[l])) append_right(j);
        }

        // Interface events and tock happen only when both sides agree.
        size_t i = 0, j = 0;
        while (i < L.lab.size() && j < R.lab.size()) {
            label_id a = L.lab[i], b = R.lab[j];
            if (a < b) { ++i; continue; }
            if (b < a) { ++j; continue; }
            size_t ie = i, je = j;
            while (ie < L.lab.size() && L.lab[ie] == a) ++ie;
            while (je < R.lab.size() && R.lab[je] == a) ++je;
            bool synced = a == k_label_tock || (label_is_visible(a) && sync[a]);
            if (synced) {
                for (size_t x = i; x < ie; ++x)
                    for (size_t y = j; y < je; ++y) {
                        emit(out, a);
                        out.st.insert(out.st.end(), L.st.begin() + x * lw,
                                      L.st.begin() + (x + 1) * lw);
                        out.st.insert(out.st.end(), R.st.begin() + y * rw,
                                      R.st.begin() + (y + 1) * rw);
                    }
            }
            i = ie;
            j = je;
        }

        if (lterm && rterm) { // distributed termination
            emit(out, k_label_term);
            push_sentinels();
        }
        canonicalize(out, w, s);
        break;
    }

    case flat_node::hide_op: {
        eval(n.a, s);
        const node_buf& C = s.buf[n.a];
        const std::vector<uint8_t>& hidden = g_.in_set[k];
        for (size_t i = 0; i < C.lab.size(); ++i) {
            label_id l = C.lab[i];
            if (l == k_label_term) {
                emit(out, k_label_term);
                push_sentinels();
                continue;
            }
            emit(out, label_is_visible(l) && hidden[l] ? k_label_tau : l);
            out.st.insert(out.st.end(), C.st.begin() + i * w, C.st.begin() + (i + 1) * w);
        }
        canonicalize(out, w, s);
        break;
    }

    case flat_node::project_op: {
        eval(n.a, s);
        const node_buf& C = s.buf[n.a];
        const std::vector<uint8_t>& kept = g_.in_set[k];
        for (size_t i = 0; i < C.lab.size(); ++i) {
            label_id l = C.lab[i];
            if (l == k_label_term) {
                emit(out, k_label_term);
                push_sentinels();
                continue;
            }
            label_id ml = l;
            if (l == k_label_tock) ml = g_.keep_tock[k] ? k_label_tock : k_label_tau;
            else if (label_is_visible(l) && !kept[l]) ml = k_label_tau;
            emit(out, ml);
            out.st.insert(out.st.end(), C.st.begin() + i * w, C.st.begin() + (i + 1) * w);
        }
        canonicalize(out, w, s);
        break;
    }

    case flat_node::rename_op: {
        eval(n.a, s);
        const node_buf& C = s.buf[n.a];
        const auto& table = g_.ren[k];
        for (size_t i = 0; i < C.lab.size(); ++i) {
            label_id l = C.lab[i];
            if (l == k_label_term) {
                emit(out, k_label_term);
                push_sentinels();
                continue;
            }
            auto copy_slice = [&] {
                out.st.insert(out.st.end(), C.st.begin() + i * w, C.st.begin() + (i + 1) * w);
            };
            if (!label_is_visible(l) || table[l].empty()) {
                emit(out, l);
                copy_slice();
            } else {
                for (label_id img : table[l]) {
                    emit(out, img);
                    copy_slice();
                }
            }
        }
        canonicalize(out, w, s);
        break;
    }

    case flat_node::prio: {
        eval(n.a, s);
        const node_buf& C = s.buf[n.a];
        bool urgent = false;
        for (label_id l : C.lab)
            if (l == k_label_tau || l == k_label_term) urgent = true;
        for (size_t i = 0; i < C.lab.size(); ++i) {
            label_id l = C.lab[i];
            if (l == k_label_tock && urgent) continue; // maximal progress
            if (l == k_label_term) {
                emit(out, k_label_term);
                push_sentinels();
                continue;
            }
            emit(out, l);
            out.st.insert(out.st.end(), C.st.begin() + i * w, C.st.begin() + (i + 1) * w);
        }
        break; // dropping and retargeting preserve order
    }
    }
}

uint64_t bytes_hash(const uint8_t* p, uint32_t n) {
    uint64_t h = 0x9e3779b97f4a7c15ull;
    uint32_t i = 0;
    for (; i + 8 <= n; i += 8) {
        uint64_t v;
        std::memcpy(&v, p + i, 8);
        h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    uint64_t tail = 0;
    if (i < n) {
        std::memcpy(&tail, p + i, n - i);
        h ^= tail + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
}

// Fixed-width tuple store with stable addresses and sequential ids.
class tuple_store {
  public:
    explicit tuple_store(uint32_t w) : width_(w ? w : 1) {}

    uint32_t size() const { return count_; }
    const uint8_t* at(uint32_t id) const {
        return chunks_[id >> k_bits].get() + size_t(id & k_mask) * width_;
    }
    uint32_t push(const uint8_t* bytes) {
        uint32_t id = count_;
        if ((id >> k_bits) == chunks_.size())
            chunks_.push_back(std::make_unique<uint8_t[]>(size_t(k_mask + 1) * width_));
        std::memcpy(chunks_[id >> k_bits].get() + size_t(id & k_mask) * width_, bytes, width_);
        ++count_;
        return id;
    }

  private:
    static constexpr uint32_t k_bits = 16;
    static constexpr uint32_t k_mask = (1u << k_bits) - 1;
    uint32_t width_;
    uint32_t count_ = 0;
    std::vector<std::unique_ptr<uint8_t[]>> chunks_;
};

// Expands slices of work items on a pool of threads; results land in
// per-item buffers so a sequential merge can keep ids deterministic.
template <class Fn>
void run_slices(unsigned threads, size_t count, Fn&& expand) {
    if (threads <= 1 || count < 128) {
        expand(0, count, 0);
        return;
    }
    std::vector<std::thread> pool;
    size_t chunk = (count + threads - 1) / threads;
    std::exception_ptr first_error;
    std::mutex err_mu;
    for (unsigned wkr = 0; wkr < threads; ++wkr) {
        size_t lo = wkr * chunk, hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi, wkr] {
            try {
                expand(lo, hi, wkr);
            } catch (...) {
                std::lock_guard<std::mutex> g(err_mu);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

struct move_list {
    std::vector<label_id> lab;
    std::vector<uint8_t> tup; // lab.size() * tuple_bytes
};

} // namespace

flat_system flatten_composition(stepper& st, term_id root, const exploration_limits& leaf_lim) {
    flatten_ctx fc{st, leaf_lim, {}, {}};
    fc.out.root = walk(fc, root);
    fc.out.source = root;
    return fc.out;
}

lts compile_lts_product(context& ctx, const flat_system& fs, const exploration_limits& lim) {
    auto t0 = std::chrono::steady_clock::now();
    auto elapsed_ms = [&] { return uint64_t(seconds_since(t0) * 1e3); };

    product_gen gen(fs, build_tables(ctx, fs));
    const uint32_t W = gen.tuple_bytes();

    tuple_store store(W);
    intern_index index;
    auto intern = [&](const uint8_t* bytes) -> std::pair<uint32_t, bool> {
        uint32_t fresh = store.size();
        uint32_t id = index.find_or_insert(
            bytes_hash(bytes, W), fresh,
            [&](uint32_t s) { return std::memcmp(store.at(s), bytes, W) == 0; },
            [&](uint32_t s) { return bytes_hash(store.at(s), W); });
        if (id == fresh) store.push(bytes);
        return {id, id == fresh};
    };

    unsigned threads = lim.threads ? lim.threads : std::thread::hardware_concurrency();
    if (threads == 0) threads = 1;

    std::vector<gen_scratch> scratch;
    for (unsigned i = 0; i < threads; ++i) scratch.push_back(gen.make_scratch());

    lts m;
    {
        gen_scratch& s = scratch[0];
        std::vector<uint32_t> init(fs.components(), 0);
        gen.pack(init.data(), s.bytes.data());
        if (lim.tau_chase) gen.chase(s);
        intern(s.bytes.data());
        m.state_term.push_back(k_invalid);
        m.row.push_back(0);
    }

    uint32_t omega_state = k_invalid;
    std::vector<uint32_t> frontier{0};
    std::vector<move_list> layer;
    while (!frontier.empty()) {
        if (lim.max_millis && elapsed_ms() > lim.max_millis)
            throw bound_exceeded("exploration wall-clock limit exceeded",
                                 {m.num_states(), m.edges.size(), seconds_since(t0)});

        layer.assign(frontier.size(), {});
        run_slices(threads, frontier.size(), [&](size_t lo, size_t hi, unsigned wkr) {
            gen_scratch& s = scratch[wkr];
            for (size_t i = lo; i < hi; ++i) {
                std::memcpy(s.bytes.data(), store.at(frontier[i]), W);
                const node_buf& mv = gen.generate(s);
                move_list& out = layer[i];
                out.lab = mv.lab;
                out.tup.resize(out.lab.size() * size_t(W));
                std::vector<uint32_t> full(s.cur);
                uint32_t lo_c = fs.nodes[fs.root].comp_lo;
                uint32_t nw = fs.nodes[fs.root].comp_hi - lo_c;
                for (size_t x = 0; x < out.lab.size(); ++x) {
                    for (uint32_t cix = 0; cix < nw; ++cix)
                        full[lo_c + cix] = mv.st[x * nw + cix];
                    gen.pack(full.data(), out.tup.data() + x * size_t(W));
                }
                if (lim.tau_chase) {
                    for (size_t x = 0; x < out.lab.size(); ++x) {
                        std::memcpy(s.bytes.data(), out.tup.data() + x * size_t(W), W);
                        gen.chase(s);
                        std::memcpy(out.tup.data() + x * size_t(W), s.bytes.data(), W);
                    }
                }
            }
        });

        std::vector<uint32_t> next;
        bool stop_hit = false;
        for (size_t i = 0; i < frontier.size(); ++i) {
            const move_list& mv = layer[i];
            for (size_t x = 0; x < mv.lab.size(); ++x) {
                const uint8_t* tgt = mv.tup.data() + x * size_t(W);
                auto [state, fresh] = intern(tgt);
                if (fresh) {
                    if (m.state_term.size() >= lim.max_states)
                        throw bound_exceeded("state limit exceeded",
                                             {m.num_states(), m.edges.size(), seconds_since(t0)});
                    m.state_term.push_back(k_invalid);
                    next.push_back(state);
                    if (std::memcmp(tgt, gen.tables().omega_tuple.data(), W) == 0)
                        omega_state = state;
                }
                m.edges.push_back({mv.lab[x], state});
                if (mv.lab[x] == lim.stop_at_label) stop_hit = true;
            }
            m.row.push_back(m.edges.size());
        }
        if (stop_hit) {
            while (m.row.size() < m.state_term.size() + 1) m.row.push_back(m.edges.size());
            break;
        }
        frontier = std::move(next);
    }

    if (omega_state != k_invalid) m.state_term[omega_state] = ctx.t_omega();
    m.stats.states = m.num_states();
    m.stats.transitions = m.edges.size();
    m.stats.compile_seconds = seconds_since(t0);
    return m;
}

check_outcome check_traces_refinement_product(context& ctx, const flat_system& fs,
                                              const dlts& spec,
                                              const exploration_limits& lim) {
    auto t0 = std::chrono::steady_clock::now();

    product_gen gen(fs, build_tables(ctx, fs));
    const uint32_t W = gen.tuple_bytes();

    tuple_store store(W);
    intern_index tuple_index;
    auto intern_tuple = [&](const uint8_t* bytes) -> uint32_t {
        uint32_t fresh = store.size();
        uint32_t id = tuple_index.find_or_insert(
            bytes_hash(bytes, W), fresh,
            [&](uint32_t s) { return std::memcmp(store.at(s), bytes, W) == 0; },
            [&](uint32_t s) { return bytes_hash(store.at(s), W); });
        if (id == fresh) store.push(bytes);
        return id;
    };

    chunked_vector<uint64_t> pairs;   // tuple id << 32 | spec state
    chunked_vector<uint64_t> parents; // predecessor pair << 32 | edge label
    intern_index pair_index;
    auto intern_pair = [&](uint32_t tup, uint32_t ds) -> std::pair<uint32_t, bool> {
        uint64_t key = (uint64_t(tup) << 32) | ds;
        uint32_t fresh = uint32_t(pairs.size());
        uint64_t h = key;
        uint32_t id = pair_index.find_or_insert(
            h, fresh, [&](uint32_t s) { return pairs[s] == key; },
            [&](uint32_t s) { return pairs[s]; });
        if (id == fresh) pairs.push_back(key);
        return {id, id == fresh};
    };

    unsigned threads = lim.threads ? lim.threads : std::thread::hardware_concurrency();
    if (threads == 0) threads = 1;
    std::vector<gen_scratch> scratch;
    for (unsigned i = 0; i < threads; ++i) scratch.push_back(gen.make_scratch());

    {
        gen_scratch& s = scratch[0];
        std::vector<uint32_t> init(fs.components(), 0);
        gen.pack(init.data(), s.bytes.data());
        if (lim.tau_chase) gen.chase(s);
        intern_pair(intern_tuple(s.bytes.data()), 0);
        parents.push_back(~uint64_t(0));
    }

    // Work item result: per move, the label, the successor tuple (chased) and
    // the spec successor (k_invalid marks a label the spec refuses).
    struct pair_moves {
        std::vector<label_id> lab;
        std::vector<uint32_t> dnext;
        std::vector<uint8_t> tup;
    };

    check_outcome out;
    std::vector<uint32_t> work{0};
    std::vector<uint32_t> next_layer;
    std::vector<pair_moves> results;
    uint32_t violator = k_invalid; // pair the violating move starts from
    label_id violating = k_invalid;

    while (!work.empty() && violator == k_invalid) {
        size_t pos = 0;
        while (pos < work.size() && violator == k_invalid) {
            if (lim.max_millis && seconds_since(t0) * 1e3 > double(lim.max_millis))
                throw bound_exceeded("refinement wall-clock limit exceeded",
                                     {pairs.size(), 0, seconds_since(t0)});
            size_t count = work.size() - pos;
            results.assign(count, {});
            run_slices(threads, count, [&](size_t lo, size_t hi, unsigned wkr) {
                gen_scratch& s = scratch[wkr];
                for (size_t i = lo; i < hi; ++i) {
                    uint64_t key = pairs[work[pos + i]];
                    uint32_t tup = uint32_t(key >> 32);
                    uint32_t ds = uint32_t(key);
                    std::memcpy(s.bytes.data(), store.at(tup), W);
                    const node_buf& mv = gen.generate(s);
                    pair_moves& pm = results[i];
                    // Snapshot the moves before chasing: the chase reuses the
                    // generator buffers mv aliases.
                    pm.lab = mv.lab;
                    pm.tup.resize(pm.lab.size() * size_t(W));
                    std::vector<uint32_t> full(s.cur);
                    uint32_t lo_c = fs.nodes[fs.root].comp_lo;
                    uint32_t nw = fs.nodes[fs.root].comp_hi - lo_c;
                    for (size_t x = 0; x < pm.lab.size(); ++x) {
                        for (uint32_t cix = 0; cix < nw; ++cix)
                            full[lo_c + cix] = mv.st[x * nw + cix];
                        gen.pack(full.data(), pm.tup.data() + x * size_t(W));
                    }
                    for (size_t x = 0; x < pm.lab.size(); ++x) {
                        label_id l = pm.lab[x];
                        if (lim.tau_chase) {
                            std::memcpy(s.bytes.data(), pm.tup.data() + x * size_t(W), W);
                            gen.chase(s);
                            std::memcpy(pm.tup.data() + x * size_t(W), s.bytes.data(), W);
                        }
                        pm.dnext.push_back(l == k_label_tau ? ds : spec.next(ds, l));
                    }
                }
            });
            size_t merged_from = pos;
            pos = work.size();
            for (size_t i = 0; i < count && violator == k_invalid; ++i) {
                uint32_t src = work[merged_from + i];
                const pair_moves& pm = results[i];
                for (size_t x = 0; x < pm.lab.size(); ++x) {
                    label_id l = pm.lab[x];
                    if (l != k_label_tau && pm.dnext[x] == k_invalid) {
                        violator = src;
                        violating = l;
                        break;
                    }
                    auto [id, fresh] = intern_pair(intern_tuple(pm.tup.data() + x * size_t(W)),
                                                   pm.dnext[x]);
                    if (!fresh) continue;
                    if (pairs.size() > lim.max_states)
                        throw bound_exceeded("refinement pair limit exceeded",
                                             {pairs.size(), 0, seconds_since(t0)});
                    parents.push_back((uint64_t(src) << 32) | l);
                    (l == k_label_tau ? work : next_layer).push_back(id);
                }
            }
        }
        work = std::move(next_layer);
        next_layer.clear();
    }

    out.stats.product_states = pairs.size();
    out.stats.seconds = seconds_since(t0);
    if (violator != k_invalid) {
        out.result = check_result::fail;
        counterexample cex;
        cex.kind = "trace";
        cex.violating = violating;
        for (uint32_t p = violator; parents[p] != ~uint64_t(0);) {
            uint64_t rec = parents[p];
            label_id l = label_id(rec);
            if (l != k_label_tau) cex.trace.push_back(l);
            p = uint32_t(rec >> 32);
        }
        std::reverse(cex.trace.begin(), cex.trace.end());
        out.cex = std::move(cex);
    }
    return out;
}

} // namespace tock
