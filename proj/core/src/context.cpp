#include "tock/context.hpp"

#include <algorithm>
#include <sstream>

namespace tock {

// Shared by the expression and term interners in expr.cpp / term.cpp.
uint64_t hash_mix(uint64_t h, uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return h;
}
namespace {
uint64_t mix(uint64_t h, uint64_t v) { return hash_mix(h, v); }
} // namespace

context::context() {
    cached_skip_ = intern_term({term_op::skip, 0, 0, 0, 0});
    cached_stop_ = intern_term({term_op::stop, 0, 0, 0, 0});
    cached_ustop_ = intern_term({term_op::ustop, 0, 0, 0, 0});
    cached_omega_ = intern_term({term_op::omega, 0, 0, 0, 0});
    // Arithmetic helpers available to every model.
    declare_native_func("min", 2, [](std::span<const value> a) {
        return value::of_int(std::min(a[0].as_int(), a[1].as_int()));
    });
    declare_native_func("max", 2, [](std::span<const value> a) {
        return value::of_int(std::max(a[0].as_int(), a[1].as_int()));
    });
}

enum_id context::declare_enum(const std::string& name, std::vector<std::string> members) {
    if (enum_names_.count(name)) throw kernel_error("enum redeclared: " + name);
    enum_id id = enum_id(enums_.size());
    enums_.push_back({name, std::move(members)});
    enum_names_[name] = id;
    return id;
}

value context::enum_value(const std::string& enum_name, const std::string& member) const {
    auto it = enum_names_.find(enum_name);
    if (it == enum_names_.end()) throw unbound_name_error("unknown enum: " + enum_name);
    const auto& e = enums_[it->second];
    for (size_t i = 0; i < e.members.size(); ++i)
        if (e.members[i] == member) return value::of_enum(it->second, int32_t(i));
    throw unbound_name_error("unknown enum member: " + enum_name + "::" + member);
}

chan_id context::declare_channel(const std::string& name, std::vector<value> domain) {
    if (channel_names_.count(name)) throw kernel_error("channel redeclared: " + name);
    if (domain.empty()) throw kernel_error("channel with empty domain: " + name);
    chan_id id = chan_id(channels_.size());
    channels_.push_back({name, std::move(domain)});
    channel_names_[name] = id;
    return id;
}

chan_id context::declare_unit_channel(const std::string& name) {
    return declare_channel(name, {value::unit_v()});
}

chan_id context::channel(const std::string& name) const {
    auto it = channel_names_.find(name);
    if (it == channel_names_.end()) throw unbound_name_error("unknown channel: " + name);
    return it->second;
}

std::optional<chan_id> context::find_channel(const std::string& name) const {
    auto it = channel_names_.find(name);
    if (it == channel_names_.end()) return std::nullopt;
    return it->second;
}

func_id context::declare_native_func(const std::string& name, uint32_t arity, native_fn fn) {
    if (func_names_.count(name)) throw kernel_error("function redeclared: " + name);
    func_id id = func_id(funcs_.size());
    funcs_.push_back({name, arity, std::move(fn), k_invalid});
    func_names_[name] = id;
    return id;
}

func_id context::declare_expr_func(const std::string& name, uint32_t arity, expr_id body) {
    if (func_names_.count(name)) throw kernel_error("function redeclared: " + name);
    func_id id = func_id(funcs_.size());
    funcs_.push_back({name, arity, nullptr, body});
    func_names_[name] = id;
    return id;
}

func_id context::func(const std::string& name) const {
    auto it = func_names_.find(name);
    if (it == func_names_.end()) throw unbound_name_error("unknown function: " + name);
    return it->second;
}

std::optional<func_id> context::find_func(const std::string& name) const {
    auto it = func_names_.find(name);
    if (it == func_names_.end()) return std::nullopt;
    return it->second;
}

def_id context::declare_def(const std::string& name, uint32_t arity) {
    if (def_names_.count(name)) throw kernel_error("process redeclared: " + name);
    def_id id = def_id(defs_.size());
    defs_.push_back({name, arity, k_invalid});
    def_names_[name] = id;
    return id;
}

void context::set_def_body(def_id d, term_id body) {
    if (terms_[body].nfree > defs_[d].arity)
        throw kernel_error("definition body of " + defs_[d].name +
                           " has more free variables than parameters");
    defs_[d].body = body;
}

def_id context::def(const std::string& name) const {
    auto it = def_names_.find(name);
    if (it == def_names_.end()) throw unbound_name_error("unknown process: " + name);
    return it->second;
}

std::optional<def_id> context::find_def(const std::string& name) const {
    auto it = def_names_.find(name);
    if (it == def_names_.end()) return std::nullopt;
    return it->second;
}

set_id context::make_event_set(bool has_tock, std::vector<set_item> items) {
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    // Drop exact events already covered by a whole-channel item.
    std::vector<set_item> out;
    out.reserve(items.size());
    for (const auto& it : items) {
        if (it.val != k_invalid) {
            bool covered = false;
            for (const auto& o : items)
                if (o.chan == it.chan && o.val == k_invalid) covered = true;
            if (covered) continue;
        }
        out.push_back(it);
    }
    for (const auto& s : out)
        if (s.chan >= channels_.size()) throw kernel_error("event set over unknown channel");
    // Deduplicate by content so equal sets share a set_id; this keeps terms
    // built from equal sets hash-consed to the same node.
    for (set_id id = 0; id < sets_.size(); ++id)
        if (sets_[id].has_tock == has_tock && sets_[id].items == out) return id;
    set_id id = set_id(sets_.size());
    sets_.push_back({has_tock, std::move(out)});
    return id;
}

set_id context::set_of_channels(std::initializer_list<chan_id> chans, bool with_tock) {
    std::vector<set_item> items;
    for (chan_id c : chans) items.push_back({c, k_invalid});
    return make_event_set(with_tock, std::move(items));
}

bool context::set_contains(set_id s, chan_id c, value_id v) const {
    const auto& d = sets_[s];
    // items are sorted by (chan, val) with k_invalid = 0xffffffff sorting last,
    // so a whole-channel item for c appears after exact items for c.
    auto lo = std::lower_bound(d.items.begin(), d.items.end(), set_item{c, 0});
    for (auto it = lo; it != d.items.end() && it->chan == c; ++it)
        if (it->val == k_invalid || it->val == v) return true;
    return false;
}

rel_id context::make_rename(std::vector<rename_pair> pairs) {
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    for (rel_id id = 0; id < rels_.size(); ++id)
        if (rels_[id] == pairs) return id;
    std::unordered_map<chan_id, std::vector<chan_id>> map;
    for (const auto& p : pairs) {
        if (p.from >= channels_.size() || p.to >= channels_.size())
            throw kernel_error("rename over unknown channel");
        // Renaming keeps the communicated value, so the target channel must be
        // able to carry everything the source can.
        const auto& fd = channels_[p.from].domain;
        const auto& td = channels_[p.to].domain;
        for (const value& v : fd)
            if (std::find(td.begin(), td.end(), v) == td.end())
                throw domain_error("rename target " + channels_[p.to].name +
                                   " cannot carry every value of " + channels_[p.from].name);
        map[p.from].push_back(p.to);
    }
    rel_id id = rel_id(rels_.size());
    rels_.push_back(std::move(pairs));
    rename_maps_.push_back(std::move(map));
    return id;
}

std::span<const chan_id> context::rename_targets(rel_id r, chan_id from) const {
    const auto& m = rename_maps_[r];
    auto it = m.find(from);
    if (it == m.end()) return {};
    return it->second;
}

value_id context::intern_value(const value& v) {
    std::lock_guard<std::mutex> g(value_mu_);
    auto it = value_ids_.find(v);
    if (it != value_ids_.end()) return it->second;
    value_id id = value_id(value_table_.size());
    value_table_.push_back(v);
    value_ids_[v] = id;
    return id;
}

label_id context::label(chan_id c, const value& v) { return label(c, intern_value(v)); }

label_id context::label(chan_id c, value_id v) {
    uint64_t key = (uint64_t(c) << 32) | v;
    std::lock_guard<std::mutex> g(label_mu_);
    auto it = label_ids_.find(key);
    if (it != label_ids_.end()) return it->second;
    label_id id = label_id(label_table_.size()) + k_first_visible_label;
    label_table_.push_back({c, v});
    label_ids_[key] = id;
    return id;
}

chan_id context::label_channel(label_id l) const {
    return label_table_[l - k_first_visible_label].first;
}

const value& context::label_value(label_id l) const {
    return value_table_[label_table_[l - k_first_visible_label].second];
}

std::string context::label_name(label_id l) const {
    if (l == k_label_tau) return "tau";
    if (l == k_label_term) return "term";
    if (l == k_label_tock) return "tock";
    const auto& [c, vid] = label_table_[l - k_first_visible_label];
    const value& v = value_table_[vid];
    std::ostringstream os;
    os << channels_[c].name;
    switch (v.kind) {
    case value_kind::unit: break;
    case value_kind::boolean: os << (v.payload ? ".true" : ".false"); break;
    case value_kind::integer: os << "." << v.payload; break;
    case value_kind::enumerant: os << "." << enums_[v.enum_type].members[size_t(v.payload)]; break;
    }
    return os.str();
}

size_t context::label_count() const {
    std::lock_guard<std::mutex> g(label_mu_);
    return label_table_.size() + k_first_visible_label;
}

bool context::label_in_set(label_id l, set_id s) const {
    if (l == k_label_tock) return sets_[s].has_tock;
    if (!label_is_visible(l)) return false;
    const auto& [c, vid] = label_table_[l - k_first_visible_label];
    return set_contains(s, c, vid);
}

size_t context::term_count() const {
    std::lock_guard<std::mutex> g(term_mu_);
    return terms_.size();
}

uint32_t context::intern_cell_state(const cell_state& cs) {
    uint64_t key = (uint64_t(cs.val) << 8) | cs.flags;
    std::lock_guard<std::mutex> g(cell_mu_);
    auto it = cell_state_ids_.find(key);
    if (it != cell_state_ids_.end()) return it->second;
    uint32_t id = uint32_t(cell_states_.size());
    cell_states_.push_back(cs);
    cell_state_ids_[key] = id;
    return id;
}

// ---- hashing helpers shared by the interners ----

uint64_t hash_term_node(const term_node& n) {
    uint64_t h = uint64_t(uint8_t(n.op)) * 0x100000001b3ull;
    h = mix(h, n.a);
    h = mix(h, n.b);
    h = mix(h, n.c);
    return h;
}

uint64_t hash_expr_node(const expr_node& n) {
    uint64_t h = (uint64_t(uint8_t(n.op)) + 77) * 0x100000001b3ull;
    h = mix(h, n.a);
    h = mix(h, n.b);
    h = mix(h, n.c);
    return h;
}

uint64_t context::term_content_hash(const term_node& n) const {
    if (n.op == term_op::ext_choice) {
        uint64_t h = mix(0xc2b2ae3d27d4eb4full, uint64_t(term_op::ext_choice));
        for (uint32_t i = 0; i < n.b; ++i) h = mix(h, child_arena_[n.a + i]);
        return h;
    }
    if (n.op == term_op::call) {
        uint64_t h = mix(0x27d4eb2f165667c5ull, uint64_t(n.a));
        for (uint32_t i = 0; i < n.c; ++i) h = mix(h, expr_arg_arena_[n.b + i]);
        return h;
    }
    return hash_term_node(n);
}

uint64_t context::expr_content_hash(const expr_node& n) const {
    if (n.op == expr_op::apply) {
        uint64_t h = mix(0x9e3779b97f4a7c15ull, uint64_t(n.a));
        for (uint32_t i = 0; i < n.c; ++i) h = mix(h, expr_arg_arena_[n.b + i]);
        return h;
    }
    return hash_expr_node(n);
}

} // namespace tock
