#include "msr/train/checkpoint.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "msr/data/tensor_io.hpp"

namespace msr::train {
namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

json read_json(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return json::parse(ss.str());
    } catch (const json::exception& e) {
        throw ParseError(ParseErrorKind::kBadJson, path.string() + ": " + e.what());
    }
}

template <typename V>
V field(const json& j, const char* key) {
    if (!j.contains(key)) throw ConfigError(std::string("model config is missing key '") + key + "'");
    try {
        return j.at(key).get<V>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("model config key '") + key + "' has the wrong type");
    }
}

}  // namespace

ordered_json model_config_to_json(const nn::ModelConfig& cfg) {
    ordered_json j;
    j["scale"] = cfg.scale;
    j["groups"] = cfg.groups;
    j["channels"] = cfg.channels;
    j["blocks"] = cfg.blocks;
    j["use_aux"] = cfg.use_aux;
    j["use_sep_attention"] = cfg.use_sep_attention;
    j["use_m_int"] = cfg.use_m_int;
    j["use_m_att"] = cfg.use_m_att;
    j["alpha"] = cfg.alpha;
    return j;
}

nn::ModelConfig model_config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("model config must be a JSON object");
    static const std::set<std::string> known{"scale",     "groups",  "channels",
                                             "blocks",    "use_aux", "use_sep_attention",
                                             "use_m_int", "use_m_att", "alpha"};
    for (const auto& [key, _] : j.items()) {
        if (!known.contains(key)) throw ConfigError("unknown model config key '" + key + "'");
    }
    nn::ModelConfig cfg;
    cfg.scale = field<std::size_t>(j, "scale");
    cfg.groups = field<std::size_t>(j, "groups");
    cfg.channels = field<std::size_t>(j, "channels");
    cfg.blocks = field<std::size_t>(j, "blocks");
    cfg.use_aux = field<bool>(j, "use_aux");
    cfg.use_sep_attention = field<bool>(j, "use_sep_attention");
    cfg.use_m_int = field<bool>(j, "use_m_int");
    cfg.use_m_att = field<bool>(j, "use_m_att");
    cfg.alpha = field<double>(j, "alpha");
    cfg.validate();
    return cfg;
}

void save_checkpoint(const fs::path& dir, const nn::SANet<float>& model) {
    std::error_code ec;
    fs::create_directories(dir / "params", ec);
    if (ec) throw IoError("cannot create " + (dir / "params").string() + ": " + ec.message());

    ordered_json index = ordered_json::object();
    std::size_t k = 0;
    for (const auto& e : model.params().entries()) {
        const std::string file = "params/" + std::to_string(k++) + ".msrt";
        data::save_tensor(dir / file, e.var->value);
        const Shape& s = e.var->value.shape();
        index[e.name] = ordered_json{
            {"file", file}, {"shape", {s.n, s.c, s.h, s.w}}, {"trainable", e.trainable}};
    }
    write_text(dir / "model.json", model_config_to_json(model.config()).dump(2) + "\n");
    write_text(dir / "index.json", index.dump(2) + "\n");
}

nn::SANet<float> load_checkpoint(const fs::path& dir) {
    const nn::ModelConfig cfg = model_config_from_json(read_json(dir / "model.json"));
    nn::SANet<float> model(cfg, 0);
    const json index = read_json(dir / "index.json");
    if (!index.is_object()) throw ParseError(ParseErrorKind::kBadJson, "index.json must be an object");
    std::set<std::string> seen;
    for (const auto& [name, entry] : index.items()) {
        std::string file;
        try {
            file = entry.at("file").get<std::string>();
        } catch (const json::exception& e) {
            throw ParseError(ParseErrorKind::kBadJson, "index.json entry " + name + ": " + e.what());
        }
        if (!model.params().contains(name)) {
            throw ShapeError("checkpoint parameter '" + name + "' does not exist in the model");
        }
        seen.insert(name);
        Tensor<float> t = data::load_tensor(dir / file);
        const auto& var = model.params().get(name);
        require_same_shape(var->value, t, name.c_str());
        var->value = std::move(t);
    }
    if (seen.size() != model.params().size()) {
        throw ShapeError("checkpoint holds " + std::to_string(seen.size()) +
                         " parameters, model expects " + std::to_string(model.params().size()));
    }
    return model;
}

}  // namespace msr::train
