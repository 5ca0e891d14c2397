#pragma once

#include "tock/check.hpp"

#include <string>
#include <vector>

namespace tock {

struct assertion_row {
    std::string name;
    std::string statement;
    bool passed = false;
    double compile_seconds = 0.0;
    double verify_seconds = 0.0;
    uint64_t states = 0;       // implementation-side state count
    uint64_t transitions = 0;  // implementation-side transition count
    std::string counterexample_text; // empty on pass
};

struct verification_report {
    std::string model;
    std::string profile;
    std::vector<assertion_row> rows;
};

// Fixed-width table, one line per assertion, times in seconds.
std::string report_to_text(const verification_report& r);

// Deterministic apart from the "timings" object: two runs over the same model
// and profile produce byte-identical output once that object is removed.
std::string report_to_json(const verification_report& r);

std::string report_to_csv(const verification_report& r);

} // namespace tock
