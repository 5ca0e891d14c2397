#pragma once

#include "tock/context.hpp"

#include <map>
#include <string>

namespace tock {

struct parse_error : kernel_error {
    parse_error(const std::string& msg, uint32_t line)
        : kernel_error("line " + std::to_string(line) + ": " + msg), line(line) {}
    uint32_t line;
};

// A parsed process file: named definitions plus any channels it declared.
// Only definitions without parameters can serve as entry points.
struct parsed_module {
    std::map<std::string, def_id> defs;

    bool has(const std::string& name) const { return defs.count(name) != 0; }
};

// Grammar documented in docs/process-format.md. Channel declarations must
// precede their first use; definitions may reference each other freely.
parsed_module parse_process_text(context& ctx, const std::string& text);

parsed_module parse_process_file(context& ctx, const std::string& path);

// Entry-point helper: a zero-parameter definition as a callable term.
term_id instantiate(context& ctx, const parsed_module& m, const std::string& name);

} // namespace tock
