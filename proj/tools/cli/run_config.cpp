#include "run_config.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <type_traits>

namespace msr::cli {
namespace {

using nlohmann::json;
using Setter = std::function<void(RunConfig&, const json&)>;

template <typename V>
V as(const json& v) {
    if constexpr (std::is_same_v<V, bool>) {
        if (!v.is_boolean()) throw json::type_error::create(302, "expected boolean", nullptr);
    } else if constexpr (std::is_integral_v<V>) {
        if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
            throw json::type_error::create(302, "expected non-negative integer", nullptr);
        }
    } else if constexpr (std::is_floating_point_v<V>) {
        if (!v.is_number()) throw json::type_error::create(302, "expected number", nullptr);
    }
    return v.get<V>();
}

template <typename V, typename Owner>
Setter field(V Owner::*member, Owner RunConfig::*part) {
    return [member, part](RunConfig& c, const json& v) { (c.*part).*member = as<V>(v); };
}

const std::map<std::string, Setter>& setters() {
    using nn::ModelConfig;
    using train::TrainConfig;
    static const std::map<std::string, Setter> s = {
        {"scale", field(&ModelConfig::scale, &RunConfig::model)},
        {"groups", field(&ModelConfig::groups, &RunConfig::model)},
        {"channels", field(&ModelConfig::channels, &RunConfig::model)},
        {"blocks", field(&ModelConfig::blocks, &RunConfig::model)},
        {"use_aux", field(&ModelConfig::use_aux, &RunConfig::model)},
        {"use_sep_attention", field(&ModelConfig::use_sep_attention, &RunConfig::model)},
        {"use_m_int", field(&ModelConfig::use_m_int, &RunConfig::model)},
        {"use_m_att", field(&ModelConfig::use_m_att, &RunConfig::model)},
        {"alpha",
         [](RunConfig& c, const json& v) { c.model.alpha = c.train.alpha = as<double>(v); }},
        {"lr", field(&TrainConfig::lr, &RunConfig::train)},
        {"epochs", field(&TrainConfig::epochs, &RunConfig::train)},
        {"max_steps", field(&TrainConfig::max_steps, &RunConfig::train)},
        {"batch_size", field(&TrainConfig::batch_size, &RunConfig::train)},
        {"seed", field(&TrainConfig::seed, &RunConfig::train)},
        {"beta1", field(&TrainConfig::beta1, &RunConfig::train)},
        {"beta2", field(&TrainConfig::beta2, &RunConfig::train)},
        {"eps", field(&TrainConfig::eps, &RunConfig::train)},
        {"loss",
         [](RunConfig& c, const json& v) { c.train.loss = train::parse_loss(as<std::string>(v)); }},
    };
    return s;
}

std::string join(const std::vector<std::string>& keys) {
    std::string out;
    for (const auto& k : keys) out += (out.empty() ? "" : ", ") + k;
    return out;
}

}  // namespace

nn::ModelConfig model_profile(const std::string& name) {
    if (name == "standard") return nn::standard_model_profile();
    if (name == "desk") return nn::desk_model_profile();
    throw ConfigError("unknown profile '" + name + "' (expected standard or desk)");
}

train::TrainConfig train_profile(const std::string& name) {
    if (name == "standard") return train::standard_train_profile();
    if (name == "desk") return train::desk_train_profile();
    throw ConfigError("unknown profile '" + name + "' (expected standard or desk)");
}

RunConfig parse_run_config(const json& j) {
    if (!j.is_object()) throw ConfigError("run config must be a JSON object");
    const auto& known = setters();

    std::vector<std::string> unknown;
    for (const auto& [key, _] : j.items()) {
        if (key != "profile" && key != "variant" && !known.contains(key)) unknown.push_back(key);
    }
    std::vector<std::string> bad;
    auto text_key = [&](const char* key) -> std::string {
        if (!j.contains(key)) return {};
        if (!j[key].is_string()) {
            bad.emplace_back(key);
            return {};
        }
        return j[key].get<std::string>();
    };
    const std::string profile = text_key("profile");
    const std::string variant = text_key("variant");

    RunConfig cfg;
    try {
        cfg.model = model_profile(profile.empty() ? "desk" : profile);
        cfg.train = train_profile(profile.empty() ? "desk" : profile);
    } catch (const ConfigError&) {
        bad.emplace_back("profile");
    }
    try {
        if (!variant.empty()) cfg.model = nn::ablation_config(variant, cfg.model);
    } catch (const ConfigError&) {
        bad.emplace_back("variant");
    }

    for (const auto& [key, setter] : known) {
        if (!j.contains(key)) continue;
        try {
            setter(cfg, j[key]);
        } catch (const json::exception&) {
            bad.push_back(key);
        } catch (const ConfigError&) {
            bad.push_back(key);
        }
    }
    if (!unknown.empty() || !bad.empty()) {
        std::string msg;
        if (!unknown.empty()) msg = "unknown config keys: " + join(unknown);
        if (!bad.empty()) msg += (msg.empty() ? "" : "; ") + std::string("invalid values for: ") + join(bad);
        std::vector<std::string> keys = unknown;
        keys.insert(keys.end(), bad.begin(), bad.end());
        throw ConfigKeyError(msg, keys);
    }

    cfg.model.validate();
    cfg.train.validate();
    return cfg;
}

RunConfig parse_run_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_run_config(j);
}

json canonical_json(const RunConfig& cfg) {
    const auto& m = cfg.model;
    const auto& t = cfg.train;
    json j;
    j["scale"] = m.scale;
    j["groups"] = m.groups;
    j["channels"] = m.channels;
    j["blocks"] = m.blocks;
    j["use_aux"] = m.use_aux;
    j["use_sep_attention"] = m.use_sep_attention;
    j["use_m_int"] = m.use_m_int;
    j["use_m_att"] = m.use_m_att;
    j["alpha"] = t.alpha;
    j["lr"] = t.lr;
    j["epochs"] = t.epochs;
    j["max_steps"] = t.max_steps;
    j["batch_size"] = t.batch_size;
    j["seed"] = t.seed;
    j["beta1"] = t.beta1;
    j["beta2"] = t.beta2;
    j["eps"] = t.eps;
    j["loss"] = std::string(train::loss_name(t.loss));
    return j;
}

}  // namespace msr::cli
