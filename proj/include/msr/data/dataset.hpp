#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "msr/fourier/kspace.hpp"

namespace msr::data {

struct SamplePair {
    std::string id;
    fourier::Image x_aux;  // HR auxiliary contrast
    fourier::Image x_tar;  // HR target contrast (ground truth)
    fourier::Image y_tar;  // LR target contrast, degrade(x_tar, scale)
    std::size_t scale = 1;
};

struct ManifestEntry {
    std::string id;
    std::string aux;
    std::string tar;
    std::string lr;

    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetManifest {
    std::string split;  // train | val | test
    std::uint64_t seed = 0;
    std::size_t scale = 1;
    std::vector<ManifestEntry> entries;

    friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

struct SplitRatios {
    std::size_t train = 7;
    std::size_t val = 1;
    std::size_t test = 2;
};

struct SplitSizes {
    std::size_t train = 0;
    std::size_t val = 0;
    std::size_t test = 0;
};

struct DatasetSpec {
    std::uint64_t seed = 0;
    std::size_t count = 10;
    std::size_t height = 64;
    std::size_t width = 64;
    std::size_t scale = 2;
    int n_shapes = 6;
    SplitRatios ratios{};
    // Overrides the auxiliary-intensity stream; geometry and target stay fixed.
    std::optional<std::uint64_t> aux_seed;
};

// floor for train and val, remainder to test.
[[nodiscard]] SplitSizes split_sizes(std::size_t count, const SplitRatios& ratios);

// Validates count >= 10, scale divisibility and phantom size.
void validate(const DatasetSpec& spec);

[[nodiscard]] std::string sample_id(std::size_t index);
[[nodiscard]] SamplePair make_sample(const DatasetSpec& spec, std::size_t index);

// Manifests only (train, val, test); paths are relative to the dataset root.
[[nodiscard]] std::array<DatasetManifest, 3> build_dataset(const DatasetSpec& spec);

// In-memory samples for each split, in manifest order.
struct InMemoryDataset {
    std::vector<SamplePair> train;
    std::vector<SamplePair> val;
    std::vector<SamplePair> test;
};
[[nodiscard]] InMemoryDataset generate_dataset(const DatasetSpec& spec);

// Writes <root>/{train,val,test}.json and <root>/samples/*.msrt.
void write_dataset(const DatasetSpec& spec, const std::filesystem::path& root);

void save_manifest(const std::filesystem::path& path, const DatasetManifest& m);
[[nodiscard]] DatasetManifest load_manifest(const std::filesystem::path& path);

// Loads and validates every sample in the manifest (ids unique, shapes consistent).
[[nodiscard]] std::vector<SamplePair> load_samples(const std::filesystem::path& root,
                                                   const DatasetManifest& m);

}  // namespace msr::data
