#include "msr/nn/model.hpp"

namespace msr::nn {
namespace {

std::string stage(std::size_t l, const char* branch) {
    return "stage" + std::to_string(l) + "." + branch;
}

}  // namespace

void ModelConfig::validate() const {
    if (scale < 1) throw ConfigError("scale must be >= 1");
    if (groups < 1) throw ConfigError("groups (L) must be >= 1");
    if (channels < 4) throw ConfigError("channels (C) must be >= 4");
    if (blocks < 1) throw ConfigError("blocks (B) must be >= 1");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
    if (use_sep_attention && !use_aux) {
        throw ConfigError("use_sep_attention requires use_aux");
    }
    if (use_m_int && !use_aux && groups < 2) {
        throw ConfigError("use_m_int without use_aux needs at least 2 groups");
    }
}

ModelConfig standard_model_profile() { return ModelConfig{}; }

ModelConfig desk_model_profile() {
    ModelConfig c;
    c.groups = 2;
    c.channels = 16;
    return c;
}

const std::vector<std::string>& ablation_names() {
    static const std::vector<std::string> names{"Ab1", "Ab2", "Ab3", "Ab4", "full"};
    return names;
}

ModelConfig ablation_config(std::string_view name, const ModelConfig& base) {
    ModelConfig c = base;
    auto set = [&c](bool aux, bool m_int, bool m_att, bool sep) {
        c.use_aux = aux;
        c.use_m_int = m_int;
        c.use_m_att = m_att;
        c.use_sep_attention = sep;
    };
    if (name == "Ab1") {
        set(false, false, false, false);
    } else if (name == "Ab2") {
        set(false, false, true, false);
    } else if (name == "Ab3") {
        set(true, false, true, false);
    } else if (name == "Ab4") {
        set(true, true, true, false);
    } else if (name == "full") {
        set(true, true, true, true);
    } else {
        throw ConfigError("unknown ablation variant: " + std::string(name));
    }
    return c;
}

template <typename T>
SANet<T>::SANet(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    Rng rng(seed);
    const std::size_t C = cfg_.channels;
    const std::size_t s = cfg_.scale;
    if (cfg_.use_aux) add_conv(params_, "head.aux", 1, C, 3, rng);
    add_conv(params_, "head.tar", 1, C * s * s, 3, rng);
    for (std::size_t l = 1; l <= cfg_.groups; ++l) {
        if (cfg_.use_aux) add_residual_group(params_, stage(l, "aux"), C, cfg_.blocks, rng);
        if (cfg_.use_sep_attention) add_separable_attention(params_, stage(l, "sep"), C, rng);
        add_residual_group(params_, stage(l, "tar"), C, cfg_.blocks, rng);
    }
    if (cfg_.use_m_att) {
        add_channel_spatial_attention(params_, "m_att.tar", rng);
        if (cfg_.use_aux) add_channel_spatial_attention(params_, "m_att.aux", rng);
    }
    if (cfg_.use_m_int) {
        const std::size_t stages = cfg_.use_aux ? 2 * cfg_.groups : cfg_.groups;
        add_conv(params_, "m_int.proj", stages * C, C, 1, rng);
    }
    add_conv(params_, "recon.tar", C, 1, 3, rng);
    if (cfg_.use_aux) add_conv(params_, "recon.aux", C, 1, 3, rng);
}

template <typename T>
std::pair<Var<T>, Var<T>> SANet<T>::extract_features(const Var<T>& x_aux, const Var<T>& y_tar) const {
    const Shape ys = y_tar->value.shape();
    if (ys.c != 1) throw ShapeError("y_tar must have one channel");
    auto f_tar = pixel_shuffle(conv(params_, "head.tar", y_tar), cfg_.scale);
    Var<T> f_aux;
    if (cfg_.use_aux) {
        if (!x_aux) throw ShapeError("x_aux is required when the auxiliary branch is enabled");
        const Shape xs = x_aux->value.shape();
        if (xs.c != 1 || xs.n != ys.n || xs.h != ys.h * cfg_.scale || xs.w != ys.w * cfg_.scale) {
            throw ShapeError("x_aux " + to_string(xs) + " does not match upsampled y_tar " +
                             to_string(ys) + " at scale " + std::to_string(cfg_.scale));
        }
        f_aux = conv(params_, "head.aux", x_aux);
    }
    return {f_aux, f_tar};
}

template <typename T>
ForwardOutput<T> SANet<T>::forward(const Var<T>& x_aux, const Var<T>& y_tar,
                                   bool capture_diagnostics) const {
    auto [f_aux0, f_tar0] = extract_features(x_aux, y_tar);
    ForwardOutput<T> out;
    if (capture_diagnostics) out.diagnostics.emplace();

    Var<T> fa = f_aux0;
    Var<T> ft = f_tar0;
    std::vector<Var<T>> stages;
    for (std::size_t l = 1; l <= cfg_.groups; ++l) {
        if (cfg_.use_aux) fa = residual_group(params_, stage(l, "aux"), fa, cfg_.blocks);
        Var<T> fused;
        if (cfg_.use_sep_attention) {
            AttentionPair<T>* maps = nullptr;
            if (out.diagnostics) maps = &out.diagnostics->attention.emplace_back();
            fused = separable_attention(params_, stage(l, "sep"), fa, ft, maps);
        } else if (cfg_.use_aux) {
            fused = add(fa, ft);
        } else {
            fused = ft;
        }
        ft = residual_group(params_, stage(l, "tar"), fused, cfg_.blocks);
        if (cfg_.use_aux) stages.push_back(fa);
        stages.push_back(ft);
    }

    const Var<T> g_tar = cfg_.use_m_att ? channel_spatial_attention(params_, "m_att.tar", ft) : ft;
    Var<T> sum = add(f_tar0, g_tar);
    if (cfg_.use_m_int) {
        Tensor<T>* affinity = out.diagnostics ? &out.diagnostics->affinity : nullptr;
        sum = add(sum, conv(params_, "m_int.proj", multi_stage_integration(stages, affinity)));
    }
    out.sr_tar = conv(params_, "recon.tar", sum);
    if (cfg_.use_aux) {
        const Var<T> g_aux = cfg_.use_m_att ? channel_spatial_attention(params_, "m_att.aux", fa) : fa;
        out.sr_aux = conv(params_, "recon.aux", g_aux);
    }
    return out;
}

template class SANet<float>;
template class SANet<double>;

}  // namespace msr::nn
