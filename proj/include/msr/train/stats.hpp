#pragma once

#include <cstddef>
#include <span>

namespace msr::train {

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
    double mean_diff = 0.0;
    std::size_t n = 0;
    // True when the differences have zero spread but a nonzero mean; p is
    // then reported as 0 (read: p < 1e-12).
    bool degenerate = false;
};

// Two-sided paired Student's t-test on a - b with n - 1 degrees of freedom.
// All-zero differences give t = 0, p = 1. Throws ShapeError on length
// mismatch and ConfigError for fewer than two pairs.
[[nodiscard]] TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

}  // namespace msr::train
