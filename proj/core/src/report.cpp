#include "tock/report.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <iomanip>
#include <sstream>

namespace tock {

namespace {
std::string fmt_seconds(double s) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << s << "s";
    return os.str();
}
} // namespace

std::string report_to_text(const verification_report& r) {
    struct widths {
        size_t name = 9, result = 6, comp = 11, verif = 12, total = 7, states = 8, trans = 11;
    } w;
    std::vector<std::array<std::string, 7>> cells;
    for (const assertion_row& row : r.rows) {
        std::array<std::string, 7> c{
            row.name,
            row.passed ? "Pass" : "Fail",
            fmt_seconds(row.compile_seconds),
            fmt_seconds(row.verify_seconds),
            fmt_seconds(row.compile_seconds + row.verify_seconds),
            std::to_string(row.states),
            std::to_string(row.transitions),
        };
        w.name = std::max(w.name, c[0].size());
        w.result = std::max(w.result, c[1].size());
        w.comp = std::max(w.comp, c[2].size());
        w.verif = std::max(w.verif, c[3].size());
        w.total = std::max(w.total, c[4].size());
        w.states = std::max(w.states, c[5].size());
        w.trans = std::max(w.trans, c[6].size());
        cells.push_back(std::move(c));
    }
    std::ostringstream os;
    os << "Model: " << r.model << "  Profile: " << r.profile << "\n";
    auto line = [&](const std::array<std::string, 7>& c) {
        os << std::left << std::setw(int(w.name)) << c[0] << "  " << std::setw(int(w.result))
           << c[1] << "  " << std::right << std::setw(int(w.comp)) << c[2] << "  "
           << std::setw(int(w.verif)) << c[3] << "  " << std::setw(int(w.total)) << c[4] << "  "
           << std::setw(int(w.states)) << c[5] << "  " << std::setw(int(w.trans)) << c[6]
           << "\n";
    };
    line({"Assertion", "Result", "Compilation", "Verification", "Total", "States",
          "Transitions"});
    for (const auto& c : cells) line(c);
    for (const assertion_row& row : r.rows)
        if (!row.passed && !row.counterexample_text.empty())
            os << "\n" << row.name << " counterexample:\n" << row.counterexample_text << "\n";
    return os.str();
}

std::string report_to_json(const verification_report& r) {
    nlohmann::ordered_json j;
    j["model"] = r.model;
    j["profile"] = r.profile;
    nlohmann::ordered_json results = nlohmann::ordered_json::array();
    nlohmann::ordered_json timings = nlohmann::ordered_json::object();
    for (const assertion_row& row : r.rows) {
        nlohmann::ordered_json e;
        e["name"] = row.name;
        e["statement"] = row.statement;
        e["result"] = row.passed ? "pass" : "fail";
        e["states"] = row.states;
        e["transitions"] = row.transitions;
        if (!row.counterexample_text.empty()) e["counterexample"] = row.counterexample_text;
        results.push_back(std::move(e));
        nlohmann::ordered_json t;
        t["compile_seconds"] = row.compile_seconds;
        t["verify_seconds"] = row.verify_seconds;
        t["total_seconds"] = row.compile_seconds + row.verify_seconds;
        timings[row.name] = std::move(t);
    }
    j["results"] = std::move(results);
    j["timings"] = std::move(timings);
    return j.dump(2);
}

std::string report_to_csv(const verification_report& r) {
    std::ostringstream os;
    os << "assertion,result,compile_seconds,verify_seconds,total_seconds,states,transitions\n";
    for (const assertion_row& row : r.rows) {
        os << row.name << "," << (row.passed ? "pass" : "fail") << "," << std::fixed
           << std::setprecision(3) << row.compile_seconds << "," << row.verify_seconds << ","
           << (row.compile_seconds + row.verify_seconds) << "," << row.states << ","
           << row.transitions << "\n";
    }
    return os.str();
}

} // namespace tock
