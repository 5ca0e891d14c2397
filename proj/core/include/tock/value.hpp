#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace tock {

// Errors thrown by the kernel. All derive from std::runtime_error so callers
// can catch broadly; the distinct types matter for tests and the CLI exit path.
struct kernel_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct domain_error : kernel_error {
    using kernel_error::kernel_error;
};
struct eval_error : kernel_error {
    using kernel_error::kernel_error;
};
struct unbound_name_error : kernel_error {
    using kernel_error::kernel_error;
};
struct unguarded_recursion_error : kernel_error {
    using kernel_error::kernel_error;
};
struct instantiation_error : kernel_error {
    using kernel_error::kernel_error;
};

enum class value_kind : uint8_t { unit, boolean, integer, enumerant };

// A runtime value: unit, bool, bounded int, or a member of a declared
// enumeration. Enum members carry the id of their enumeration type so that
// members of different enums never compare equal.
struct value {
    value_kind kind = value_kind::unit;
    int32_t payload = 0;    // bool 0/1, int value, enum member index
    uint16_t enum_type = 0; // meaningful for enumerants only

    static value unit_v() { return {}; }
    static value of_bool(bool b) { return {value_kind::boolean, b ? 1 : 0, 0}; }
    static value of_int(int32_t i) { return {value_kind::integer, i, 0}; }
    static value of_enum(uint16_t type, int32_t member) {
        return {value_kind::enumerant, member, type};
    }

    bool operator==(const value& o) const {
        return kind == o.kind && payload == o.payload && enum_type == o.enum_type;
    }
    bool operator!=(const value& o) const { return !(*this == o); }
    // Total order used for canonical sorting of domains and event sets.
    bool operator<(const value& o) const {
        if (kind != o.kind) return kind < o.kind;
        if (enum_type != o.enum_type) return enum_type < o.enum_type;
        return payload < o.payload;
    }

    bool as_bool() const {
        if (kind != value_kind::boolean) throw eval_error("value is not a boolean");
        return payload != 0;
    }
    int32_t as_int() const {
        if (kind != value_kind::integer) throw eval_error("value is not an integer");
        return payload;
    }
};

inline size_t hash_value(const value& v) {
    uint64_t h = (uint64_t(uint8_t(v.kind)) << 48) ^ (uint64_t(v.enum_type) << 32) ^
                 uint32_t(v.payload);
    h *= 0x9e3779b97f4a7c15ull;
    return size_t(h ^ (h >> 29));
}

} // namespace tock

template <> struct std::hash<tock::value> {
    size_t operator()(const tock::value& v) const { return tock::hash_value(v); }
};
