#pragma once

// Checkpoint directory layout:
//   model.json   model configuration
//   index.json   {"<name>": {"file", "shape", "trainable"}, ...}
//   params/<k>.msrt, one tensor per parameter in registration order

#include <filesystem>

#include "json.hpp"
#include "msr/nn/model.hpp"

namespace msr::train {

[[nodiscard]] nlohmann::ordered_json model_config_to_json(const nn::ModelConfig& cfg);
// Rejects unknown or missing keys with ConfigError.
[[nodiscard]] nn::ModelConfig model_config_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& dir, const nn::SANet<float>& model);

// Rebuilds the model from model.json and loads every parameter. Throws
// ShapeError when the stored tensors do not match the configuration.
[[nodiscard]] nn::SANet<float> load_checkpoint(const std::filesystem::path& dir);

}  // namespace msr::train
