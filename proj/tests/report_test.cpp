// Report rendering: table layout, JSON determinism modulo the timings object,
// CSV shape.

#include "tock/report.hpp"

#include <nlohmann/json.hpp>

#include <gtest/gtest.h>

#include <string>
#include <vector>

using namespace tock;

namespace {

verification_report sample(double time_shift) {
    verification_report r;
    r.model = "correct";
    r.profile = "desk";
    assertion_row a;
    a.name = "P2";
    a.statement = "duty cycle is zeroed after a power-off report";
    a.passed = true;
    a.compile_seconds = 0.5 + time_shift;
    a.verify_seconds = 4.25 + time_shift;
    a.states = 345016;
    a.transitions = 0;
    assertion_row b;
    b.name = "P4";
    b.statement = "free of timed deadlock";
    b.passed = false;
    b.compile_seconds = 6.0 + time_shift;
    b.verify_seconds = 1.0 + time_shift;
    b.states = 517147;
    b.transitions = 2938013;
    b.counterexample_text = "timed-deadlock\ntrace: <tock>\nloop: <tock>\n";
    r.rows = {a, b};
    return r;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    size_t start = 0;
    while (start < text.size()) {
        size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        lines.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

TEST(report_text, one_aligned_row_per_assertion_plus_counterexamples) {
    std::string text = report_to_text(sample(0.0));
    std::vector<std::string> lines = lines_of(text);

    EXPECT_EQ(lines[0], "Model: correct  Profile: desk");
    EXPECT_NE(lines[1].find("Assertion"), std::string::npos);
    EXPECT_NE(lines[1].find("Transitions"), std::string::npos);
    EXPECT_EQ(lines[2].find("P2"), 0u);
    EXPECT_NE(lines[2].find("Pass"), std::string::npos);
    EXPECT_NE(lines[2].find("4.25s"), std::string::npos);
    EXPECT_NE(lines[2].find("4.75s"), std::string::npos); // total column
    EXPECT_EQ(lines[3].find("P4"), 0u);
    EXPECT_NE(lines[3].find("Fail"), std::string::npos);
    EXPECT_NE(lines[3].find("2938013"), std::string::npos);
    // the three header rows line up column-wise
    EXPECT_EQ(lines[1].size(), lines[2].size());
    EXPECT_EQ(lines[2].size(), lines[3].size());
    // failing rows append their counterexample blocks after the table
    EXPECT_NE(text.find("P4 counterexample:\ntimed-deadlock"), std::string::npos);
    EXPECT_EQ(text.find("P2 counterexample"), std::string::npos);
}

TEST(report_json, stable_across_runs_once_timings_are_ignored) {
    std::string one = report_to_json(sample(0.0));
    std::string two = report_to_json(sample(0.125)); // same run, different clock

    nlohmann::json j1 = nlohmann::json::parse(one);
    nlohmann::json j2 = nlohmann::json::parse(two);
    EXPECT_NE(j1, j2); // timings differ
    j1.erase("timings");
    j2.erase("timings");
    EXPECT_EQ(j1, j2);

    EXPECT_EQ(j1["model"], "correct");
    EXPECT_EQ(j1["results"].size(), 2u);
    EXPECT_EQ(j1["results"][0]["result"], "pass");
    EXPECT_EQ(j1["results"][0]["states"], 345016);
    EXPECT_FALSE(j1["results"][0].contains("counterexample"));
    EXPECT_EQ(j1["results"][1]["result"], "fail");
    EXPECT_TRUE(j1["results"][1].contains("counterexample"));
    EXPECT_TRUE(j2.contains("profile"));
}

TEST(report_json, timings_cover_every_assertion) {
    nlohmann::json j = nlohmann::json::parse(report_to_json(sample(0.0)));
    ASSERT_TRUE(j.contains("timings"));
    EXPECT_EQ(j["timings"].size(), 2u);
    EXPECT_DOUBLE_EQ(j["timings"]["P2"]["total_seconds"].get<double>(), 4.75);
}

TEST(report_csv, header_plus_one_record_per_assertion) {
    std::vector<std::string> lines = lines_of(report_to_csv(sample(0.0)));
    ASSERT_EQ(lines.size(), 3u);
    EXPECT_EQ(lines[0],
              "assertion,result,compile_seconds,verify_seconds,total_seconds,states,"
              "transitions");
    EXPECT_EQ(lines[1], "P2,pass,0.500,4.250,4.750,345016,0");
    EXPECT_EQ(lines[2], "P4,fail,6.000,1.000,7.000,517147,2938013");
}

} // namespace
