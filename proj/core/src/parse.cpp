#include "tock/parse.hpp"

#include <cctype>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <unordered_set>

namespace tock {

namespace {

enum class tk { end, ident, number, sym };

struct token {
    tk kind = tk::end;
    std::string text;
    int64_t num = 0;
    uint32_t line = 0;
};

const std::unordered_set<std::string> k_keywords = {
    "SKIP", "STOP", "USTOP", "WAIT", "TP",   "EndBy", "TRUN",    "ADeadline",
    "if",   "then", "else",  "and",  "or",   "not",   "true",    "false",
    "channel", "tock"};

// Longest-match symbol table; order matters only within equal prefixes.
const char* k_symbols[] = {"->", "[[", "]]", "[|", "|]", "|||", "[]", "/\\",
                           "<-", "==", "!=", "<=", ">=", ";",   "\\", "{",
                           "}",  "(",  ")",  ",",  "!",  "?",   ":",  ".",
                           "<",  ">",  "=",  "+",  "-"};

std::vector<token> lex(const std::string& text, uint32_t line_no) {
    std::vector<token> out;
    size_t i = 0;
    while (i < text.size()) {
        char ch = text[i];
        if (std::isspace(static_cast<unsigned char>(ch))) {
            ++i;
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
            size_t j = i;
            while (j < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) {
                ++j;
            }
            out.push_back({tk::ident, text.substr(i, j - i), 0, line_no});
            i = j;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(ch))) {
            size_t j = i;
            int64_t v = 0;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) {
                v = v * 10 + (text[j] - '0');
                ++j;
            }
            out.push_back({tk::number, text.substr(i, j - i), v, line_no});
            i = j;
            continue;
        }
        const char* best = nullptr;
        size_t best_len = 0;
        for (const char* sym : k_symbols) {
            size_t len = std::strlen(sym);
            if (len > best_len && text.compare(i, len, sym) == 0) {
                best = sym;
                best_len = len;
            }
        }
        if (!best) throw parse_error(std::string("unexpected character '") + ch + "'", line_no);
        out.push_back({tk::sym, best, 0, line_no});
        i += best_len;
    }
    out.push_back({tk::end, "", 0, line_no});
    return out;
}

struct pending_def {
    std::string name;
    std::vector<std::string> params;
    std::vector<token> body;
    uint32_t line;
    def_id id = k_invalid;
};

struct parser {
    context& c;
    const std::map<std::string, def_id>& defs;
    std::vector<token> toks;
    size_t pos = 0;
    std::vector<std::string> scope;

    parser(context& ctx, const std::map<std::string, def_id>& d, std::vector<token> t)
        : c(ctx), defs(d), toks(std::move(t)) {}

    const token& cur() const { return toks[pos]; }
    const token& peek(size_t n = 1) const {
        size_t i = pos + n;
        return i < toks.size() ? toks[i] : toks.back();
    }
    uint32_t line() const { return cur().line; }
    [[noreturn]] void fail(const std::string& msg) const { throw parse_error(msg, line()); }

    bool at_sym(const char* s) const { return cur().kind == tk::sym && cur().text == s; }
    bool eat_sym(const char* s) {
        if (!at_sym(s)) return false;
        ++pos;
        return true;
    }
    void expect_sym(const char* s) {
        if (!eat_sym(s)) fail("expected '" + std::string(s) + "' before '" + cur().text + "'");
    }
    bool at_ident(const char* s) const { return cur().kind == tk::ident && cur().text == s; }
    bool eat_ident(const char* s) {
        if (!at_ident(s)) return false;
        ++pos;
        return true;
    }
    std::string expect_name() {
        if (cur().kind != tk::ident) fail("expected a name");
        if (k_keywords.count(cur().text)) fail("'" + cur().text + "' is reserved");
        return toks[pos++].text;
    }
    uint32_t expect_nat() {
        if (cur().kind != tk::number) fail("expected a number");
        return static_cast<uint32_t>(toks[pos++].num);
    }

    std::optional<chan_id> find_channel(const std::string& name) const {
        try {
            return c.channel(name);
        } catch (const unbound_name_error&) {
            return std::nullopt;
        }
    }

    // --- expressions ---

    expr_id parse_expr() { return parse_or(); }

    expr_id parse_or() {
        expr_id e = parse_and();
        while (eat_ident("or")) e = c.e_bin(bin_op::logical_or, e, parse_and());
        return e;
    }
    expr_id parse_and() {
        expr_id e = parse_cmp();
        while (eat_ident("and")) e = c.e_bin(bin_op::logical_and, e, parse_cmp());
        return e;
    }
    expr_id parse_cmp() {
        expr_id e = parse_add();
        struct cmp_entry {
            const char* sym;
            bin_op op;
        };
        static const cmp_entry table[] = {{"==", bin_op::eq}, {"!=", bin_op::ne},
                                          {"<=", bin_op::le}, {">=", bin_op::ge},
                                          {"<", bin_op::lt},  {">", bin_op::gt}};
        for (const auto& entry : table) {
            if (eat_sym(entry.sym)) return c.e_bin(entry.op, e, parse_add());
        }
        return e;
    }
    expr_id parse_add() {
        expr_id e = parse_unary();
        for (;;) {
            if (eat_sym("+")) {
                e = c.e_bin(bin_op::add, e, parse_unary());
            } else if (eat_sym("-")) {
                e = c.e_bin(bin_op::sub, e, parse_unary());
            } else {
                return e;
            }
        }
    }
    expr_id parse_unary() {
        if (eat_ident("not")) return c.e_not(parse_unary());
        if (eat_sym("-")) return c.e_bin(bin_op::sub, c.e_int(0), parse_unary());
        return parse_prim();
    }
    expr_id parse_prim() {
        if (cur().kind == tk::number) return c.e_int(static_cast<int32_t>(toks[pos++].num));
        if (eat_ident("true")) return c.e_bool(true);
        if (eat_ident("false")) return c.e_bool(false);
        if (eat_sym("(")) {
            expr_id e = parse_expr();
            expect_sym(")");
            return e;
        }
        if (cur().kind == tk::ident && !k_keywords.count(cur().text)) {
            const std::string& name = cur().text;
            for (size_t i = scope.size(); i-- > 0;) {
                if (scope[i] == name) {
                    ++pos;
                    return c.e_var(static_cast<uint32_t>(scope.size() - 1 - i));
                }
            }
            fail("unbound variable '" + name + "'");
        }
        fail("expected an expression before '" + cur().text + "'");
    }

    // --- event sets, renames ---

    set_id parse_event_set() {
        expect_sym("{");
        bool has_tock = false;
        std::vector<set_item> items;
        if (!at_sym("}")) {
            do {
                if (eat_ident("tock")) {
                    has_tock = true;
                    continue;
                }
                std::string name = expect_name();
                auto ch = find_channel(name);
                if (!ch) fail("unknown channel '" + name + "' in event set");
                value_id v = k_invalid;
                if (eat_sym(".")) {
                    v = c.intern_value(value::of_int(static_cast<int32_t>(expect_nat())));
                }
                items.push_back({*ch, v});
            } while (eat_sym(","));
        }
        expect_sym("}");
        return c.make_event_set(has_tock, std::move(items));
    }

    rel_id parse_renames() {
        std::vector<rename_pair> pairs;
        do {
            std::string from = expect_name();
            expect_sym("<-");
            std::string to = expect_name();
            auto cf = find_channel(from);
            auto ct = find_channel(to);
            if (!cf) fail("unknown channel '" + from + "' in rename");
            if (!ct) fail("unknown channel '" + to + "' in rename");
            pairs.push_back({*cf, *ct});
        } while (eat_sym(","));
        return c.make_rename(std::move(pairs));
    }

    // --- processes (loosest to tightest binding) ---

    term_id parse_proc() { return parse_interrupt(); }

    term_id parse_interrupt() {
        term_id body = parse_parallel();
        if (eat_sym("/\\")) return c.t_interrupt(body, parse_interrupt());
        return body;
    }

    term_id parse_parallel() {
        term_id l = parse_choice();
        for (;;) {
            if (eat_sym("[|")) {
                set_id sync = parse_event_set();
                expect_sym("|]");
                l = c.t_parallel(l, sync, parse_choice());
            } else if (eat_sym("|||")) {
                l = c.t_interleave(l, parse_choice());
            } else {
                return l;
            }
        }
    }

    term_id parse_choice() {
        term_id first = parse_seq();
        if (!at_sym("[]")) return first;
        std::vector<term_id> children{first};
        while (eat_sym("[]")) children.push_back(parse_seq());
        return c.t_choice(std::move(children));
    }

    term_id parse_seq() {
        term_id l = parse_prefix();
        if (eat_sym(";")) return c.t_seq(l, parse_seq());
        return l;
    }

    bool starts_event_pattern() const {
        if (cur().kind != tk::ident || k_keywords.count(cur().text)) return false;
        if (!find_channel(cur().text)) return false;
        const token& nx = peek();
        return nx.kind == tk::sym &&
               (nx.text == "!" || nx.text == "?" || nx.text == "." || nx.text == "->");
    }

    term_id parse_prefix() {
        if (!starts_event_pattern()) return parse_postfix();
        chan_id ch = *find_channel(toks[pos++].text);
        if (eat_sym("!")) {
            expr_id v = parse_expr();
            expect_sym("->");
            return c.t_prefix_out(ch, v, parse_prefix());
        }
        if (eat_sym("?")) {
            std::string x = expect_name();
            scope.push_back(x);
            expr_id pred = k_invalid;
            if (eat_sym(":")) {
                expect_sym("{");
                pred = parse_expr();
                expect_sym("}");
            }
            expect_sym("->");
            term_id cont = parse_prefix();
            scope.pop_back();
            return c.t_prefix_in(ch, pred, cont);
        }
        if (eat_sym(".")) {
            int32_t v = static_cast<int32_t>(expect_nat());
            expect_sym("->");
            return c.t_prefix_out(ch, value::of_int(v), parse_prefix());
        }
        expect_sym("->");
        return c.t_event(ch, parse_prefix());
    }

    term_id parse_postfix() {
        term_id t = parse_atom();
        for (;;) {
            if (eat_sym("\\")) {
                t = c.t_hide(t, parse_event_set());
            } else if (eat_sym("[[")) {
                rel_id r = parse_renames();
                expect_sym("]]");
                t = c.t_rename(t, r);
            } else {
                return t;
            }
        }
    }

    term_id parse_atom() {
        if (eat_ident("SKIP")) return c.t_skip();
        if (eat_ident("STOP")) return c.t_stop();
        if (eat_ident("USTOP")) return c.t_ustop();
        if (eat_ident("WAIT")) {
            expect_sym("(");
            uint32_t d = expect_nat();
            expect_sym(")");
            return c.t_wait(d);
        }
        if (eat_ident("TP")) {
            expect_sym("(");
            term_id t = parse_proc();
            expect_sym(")");
            return c.t_timed_priority(t);
        }
        if (eat_ident("EndBy")) {
            expect_sym("(");
            term_id t = parse_proc();
            expect_sym(",");
            uint32_t d = expect_nat();
            expect_sym(")");
            return c.t_end_by(t, d);
        }
        if (eat_ident("TRUN")) {
            expect_sym("(");
            set_id s = parse_event_set();
            expect_sym(")");
            return c.t_trun(s);
        }
        if (eat_ident("ADeadline")) {
            expect_sym("(");
            set_id s = parse_event_set();
            expect_sym(",");
            set_id e = parse_event_set();
            expect_sym(",");
            uint32_t d = expect_nat();
            expect_sym(")");
            return c.t_action_deadline(s, e, d);
        }
        if (eat_ident("if")) {
            expr_id g = parse_expr();
            if (!eat_ident("then")) fail("expected 'then'");
            term_id a = parse_proc();
            if (!eat_ident("else")) fail("expected 'else'");
            term_id b = parse_proc();
            return c.t_cond(g, a, b);
        }
        if (eat_sym("(")) {
            term_id t = parse_proc();
            expect_sym(")");
            return t;
        }
        if (cur().kind == tk::ident && !k_keywords.count(cur().text)) {
            std::string name = toks[pos++].text;
            auto it = defs.find(name);
            if (it == defs.end()) fail("unknown process '" + name + "'");
            const process_def& info = c.def_info(it->second);
            std::vector<expr_id> args;
            if (eat_sym("(")) {
                if (!at_sym(")")) {
                    do {
                        args.push_back(parse_expr());
                    } while (eat_sym(","));
                }
                expect_sym(")");
            }
            if (args.size() != info.arity) {
                fail("process '" + name + "' takes " + std::to_string(info.arity) +
                     " argument(s), got " + std::to_string(args.size()));
            }
            return c.t_call(it->second, args);
        }
        fail("expected a process before '" + cur().text + "'");
    }
};

std::string strip_comment(const std::string& line) {
    size_t p = line.find("--");
    return p == std::string::npos ? line : line.substr(0, p);
}

std::vector<value> parse_domain(parser& p) {
    std::vector<value> domain;
    p.expect_sym("{");
    int64_t first = p.expect_nat();
    if (p.eat_sym(".")) {
        p.expect_sym(".");
        int64_t last = p.expect_nat();
        if (last < first) p.fail("empty range");
        for (int64_t v = first; v <= last; ++v) {
            domain.push_back(value::of_int(static_cast<int32_t>(v)));
        }
    } else {
        domain.push_back(value::of_int(static_cast<int32_t>(first)));
        while (p.eat_sym(",")) {
            domain.push_back(value::of_int(static_cast<int32_t>(p.expect_nat())));
        }
    }
    p.expect_sym("}");
    return domain;
}

} // namespace

parsed_module parse_process_text(context& ctx, const std::string& text) {
    parsed_module mod;
    std::vector<pending_def> pending;

    std::istringstream in(text);
    std::string raw;
    uint32_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string src = strip_comment(raw);
        std::vector<token> toks = lex(src, line_no);
        if (toks.front().kind == tk::end) continue;

        if (toks.front().kind == tk::ident && toks.front().text == "channel") {
            parser p(ctx, mod.defs, std::move(toks));
            ++p.pos; // channel keyword
            std::vector<std::string> names;
            names.push_back(p.expect_name());
            while (p.eat_sym(",")) names.push_back(p.expect_name());
            std::vector<value> domain{value::unit_v()};
            if (p.eat_sym(":")) domain = parse_domain(p);
            if (p.cur().kind != tk::end) p.fail("trailing input after channel declaration");
            for (const auto& n : names) {
                if (domain.size() == 1 && domain[0] == value::unit_v()) {
                    ctx.declare_unit_channel(n);
                } else {
                    ctx.declare_channel(n, domain);
                }
            }
            continue;
        }

        // definition: Name [(params)] = body
        parser p(ctx, mod.defs, std::move(toks));
        pending_def d;
        d.line = line_no;
        d.name = p.expect_name();
        if (p.eat_sym("(")) {
            do {
                d.params.push_back(p.expect_name());
            } while (p.eat_sym(","));
            p.expect_sym(")");
        }
        p.expect_sym("=");
        d.body.assign(p.toks.begin() + static_cast<long>(p.pos), p.toks.end());
        if (mod.defs.count(d.name)) throw parse_error("duplicate definition '" + d.name + "'", line_no);
        d.id = ctx.declare_def(d.name, static_cast<uint32_t>(d.params.size()));
        mod.defs[d.name] = d.id;
        pending.push_back(std::move(d));
    }

    for (auto& d : pending) {
        parser p(ctx, mod.defs, std::move(d.body));
        p.scope = d.params;
        term_id body = p.parse_proc();
        if (p.cur().kind != tk::end) p.fail("trailing input after definition of '" + d.name + "'");
        ctx.set_def_body(d.id, body);
    }
    return mod;
}

parsed_module parse_process_file(context& ctx, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw kernel_error("cannot open process file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_process_text(ctx, buf.str());
}

term_id instantiate(context& ctx, const parsed_module& m, const std::string& name) {
    auto it = m.defs.find(name);
    if (it == m.defs.end()) throw unbound_name_error("no process named '" + name + "'");
    const process_def& info = ctx.def_info(it->second);
    if (info.arity != 0) {
        throw kernel_error("process '" + name + "' takes parameters; entry points must not");
    }
    return ctx.t_call(it->second);
}

} // namespace tock
