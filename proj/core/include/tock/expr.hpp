#pragma once

#include "tock/value.hpp"

#include <cstdint>

namespace tock {

using expr_id = uint32_t;
using func_id = uint32_t;

enum class expr_op : uint8_t { constant, variable, apply, binary, negate };

enum class bin_op : uint8_t { eq, ne, lt, le, gt, ge, add, sub, logical_and, logical_or };

// Interned expression node. Fields by op:
//   constant: a = value table index
//   variable: a = de Bruijn index (0 = innermost binder)
//   apply:    a = func, b = arg arena offset, c = arg count
//   binary:   a = bin_op, b = lhs, c = rhs
//   negate:   a = operand
struct expr_node {
    expr_op op;
    uint16_t nfree = 0; // 1 + max free de Bruijn index; 0 when closed
    uint32_t a = 0, b = 0, c = 0;

    bool operator==(const expr_node& o) const {
        return op == o.op && a == o.a && b == o.b && c == o.c;
    }
};

} // namespace tock
