#include <gtest/gtest.h>

#include <sstream>

#include "postsolve/verify.hpp"

using namespace postsolve;

TEST(Verify, AllSuitesPass) {
    auto results = verify::run_suite("all");
    for (const auto& r : results) EXPECT_TRUE(r.passed) << r.name << ": " << r.detail;
}

TEST(Verify, UnknownSuiteRejected) {
    EXPECT_THROW(verify::run_suite("nonsense"), std::invalid_argument);
}

TEST(Verify, CorruptedDecayFailsPosteriorSuiteByName) {
    verify::PosteriorSuiteHooks hooks;
    hooks.decay = [](double, int k, int total, double h_prev) {
        return (1.0 - 0.5 * static_cast<double>(k) / total) * h_prev;  // wrong floor
    };
    auto results = verify::posterior_suite(hooks);
    bool endpoint_failed = false;
    bool something_passed = false;
    for (const auto& r : results) {
        if (r.name == "posterior/step_size_decay endpoint") endpoint_failed = !r.passed;
        something_passed = something_passed || r.passed;
    }
    EXPECT_TRUE(endpoint_failed);
    EXPECT_TRUE(something_passed);  // corruption is localized
}

TEST(Verify, PrinterReportsPerProperty) {
    std::ostringstream os;
    auto results = verify::schedule_suite();
    const bool ok = verify::print_results(os, results);
    EXPECT_TRUE(ok);
    const std::string text = os.str();
    EXPECT_NE(text.find("[PASS] schedule/cumulative product oracle"), std::string::npos);
    EXPECT_EQ(text.find("[FAIL]"), std::string::npos);
}
