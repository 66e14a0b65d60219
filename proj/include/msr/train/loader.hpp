#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "msr/data/dataset.hpp"

namespace msr::train {

// Worker count for data loading: hardware concurrency, capped by the
// MSR_THREADS environment variable when it holds a positive integer.
[[nodiscard]] std::size_t loader_threads();

// Loads <root>/<split>.json and its samples, in manifest order. Samples are
// read by up to `threads` workers; the result does not depend on the count.
[[nodiscard]] std::vector<data::SamplePair> load_split(const std::filesystem::path& root,
                                                       const std::string& split,
                                                       std::size_t threads = loader_threads());

}  // namespace msr::train
