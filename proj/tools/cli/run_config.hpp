#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "msr/nn/model.hpp"
#include "msr/train/config.hpp"

namespace msr::cli {

// Configuration for `msr train`. The JSON form is a flat object. Two optional
// keys seed defaults before the explicit keys are applied:
//   "profile": "standard" | "desk"    (default "desk")
//   "variant": "Ab1".."Ab4" | "full"  (component switches)
// Every other key names a ModelConfig or TrainConfig field.
struct RunConfig {
    nn::ModelConfig model = nn::desk_model_profile();
    train::TrainConfig train = train::desk_train_profile();

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Raised for unknown or ill-typed keys; keys() lists every offending key.
class ConfigKeyError : public ConfigError {
public:
    ConfigKeyError(const std::string& what, std::vector<std::string> keys)
        : ConfigError(what), keys_(std::move(keys)) {}
    [[nodiscard]] const std::vector<std::string>& keys() const noexcept { return keys_; }

private:
    std::vector<std::string> keys_;
};

[[nodiscard]] RunConfig parse_run_config(const nlohmann::json& j);
[[nodiscard]] RunConfig parse_run_config_text(const std::string& text);

// Every field spelled out, keys sorted. parse(canonical(c)) == c.
[[nodiscard]] nlohmann::json canonical_json(const RunConfig& cfg);

[[nodiscard]] nn::ModelConfig model_profile(const std::string& name);
[[nodiscard]] train::TrainConfig train_profile(const std::string& name);

}  // namespace msr::cli
