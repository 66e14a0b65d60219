#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace msr::train {

struct GradCheckOptions {
    double step = 1e-3;
    double tolerance = 1e-4;
    // Coordinates probed per tensor; smaller tensors are checked exhaustively.
    std::size_t max_coords = 24;
    // Denominator floor of the relative error, so coordinates whose true
    // gradient is zero are judged on absolute error.
    double abs_floor = 1e-6;
    std::uint64_t seed = 7;
};

struct GradCheckReport {
    std::string block;
    double max_rel_error = 0.0;
    std::string worst;          // "<tensor>[<index>]" of the largest error
    std::size_t checked = 0;
    std::size_t skipped = 0;    // probes whose +-step crossed a ReLU kink
    double tolerance = 0.0;
    bool passed = false;
};

// Blocks covered by "all".
[[nodiscard]] const std::vector<std::string>& gradcheck_blocks();

// Name of a block whose backward pass is deliberately wrong; checking it
// must fail.
inline constexpr const char* kNegativeControlBlock = "negative_control";

// Compares the reverse-mode gradient of a random linear functional of the
// block's output against central differences, in double precision. A block
// passes when the maximum relative error is below the tolerance and at most
// a quarter of the probes were skipped. Throws ConfigError for unknown names.
[[nodiscard]] GradCheckReport grad_check(const std::string& block,
                                         const GradCheckOptions& options = {});

}  // namespace msr::train
