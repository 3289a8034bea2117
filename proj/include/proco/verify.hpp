#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace proco {

// Self-contained verification suites: each one re-derives its expected values
// from an independent route (reference series, Monte Carlo, finite
// differences, resampling) and checks the production code against them at
// pinned tolerances.
struct SuiteOptions {
    std::uint64_t seed = 1;
    int samples = 100000;  // Monte Carlo sample count where a suite uses one
};

struct SuiteResult {
    std::string name;
    bool passed = false;
    nlohmann::json details;
};

// Known names: bessel, mgf, prop1, gradfd, lemma1, lemma3, prop2, prop3.
std::vector<std::string> suite_names();
SuiteResult run_suite(const std::string& name, const SuiteOptions& options);
std::vector<SuiteResult> run_all(const SuiteOptions& options);

}  // namespace proco
