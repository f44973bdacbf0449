#pragma once

#include <string>
#include <vector>

namespace cusp {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    std::vector<int> criteria;     // empty: all
    bool quick = false;            // analytic subset {1,2,3,7,8,9}
    std::string out_dir;           // optional: write verify_report.json here
    std::uint64_t base_seed = 20260808;
};

/// Runs the acceptance criteria and prints one pass/fail line per criterion.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts);

}  // namespace cusp
