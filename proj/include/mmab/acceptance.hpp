#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mmab::acceptance {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
};

// Runs the full acceptance matrix, printing one pass/fail line per criterion
// as it completes. threads bounds the worker pool used inside the heavier
// simulation criteria.
std::vector<CriterionResult> run_all(std::ostream& os, int threads);

bool all_passed(const std::vector<CriterionResult>& results);

} // namespace mmab::acceptance
