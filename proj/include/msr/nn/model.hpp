#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "msr/nn/blocks.hpp"

namespace msr::nn {

struct ModelConfig {
    std::size_t scale = 2;     // s
    std::size_t groups = 6;    // L, residual groups per branch
    std::size_t channels = 32; // C, base width (equals the fusion width)
    std::size_t blocks = 2;    // B, residual blocks per group
    bool use_aux = true;
    bool use_sep_attention = true;
    bool use_m_int = true;
    bool use_m_att = true;
    double alpha = 0.7;

    // Throws ConfigError when an invariant does not hold.
    void validate() const;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// L = 6, C = 32, alpha = 0.7.
[[nodiscard]] ModelConfig standard_model_profile();
// L = 2, C = 16: small enough to train on a CPU in minutes.
[[nodiscard]] ModelConfig desk_model_profile();

// Component switches for the ablation lattice, applied on top of `base`.
//   Ab1: none   Ab2: M_Att   Ab3: aux + M_Att   Ab4: aux + M_Int + M_Att   full: all
// Throws ConfigError for unknown names.
[[nodiscard]] ModelConfig ablation_config(std::string_view name,
                                          const ModelConfig& base = desk_model_profile());
[[nodiscard]] const std::vector<std::string>& ablation_names();

template <typename T>
struct Diagnostics {
    std::vector<AttentionPair<T>> attention;  // one per stage when separable attention is on
    Tensor<T> affinity;                       // (N, 1, m, m) when M_Int is on
};

template <typename T>
struct ForwardOutput {
    Var<T> sr_tar;
    Var<T> sr_aux;  // null unless use_aux
    std::optional<Diagnostics<T>> diagnostics;
};

template <typename T>
class SANet {
public:
    // Registers and initializes every parameter the configuration uses.
    SANet(const ModelConfig& cfg, std::uint64_t seed);

    [[nodiscard]] const ModelConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] ParamStore<T>& params() noexcept { return params_; }
    [[nodiscard]] const ParamStore<T>& params() const noexcept { return params_; }

    // x_aux: (N, 1, H, W), may be null when use_aux is off.
    // y_tar: (N, 1, H/s, W/s).
    // Returns (F_aux^0, F_tar^0); F_aux^0 is null without the auxiliary branch.
    [[nodiscard]] std::pair<Var<T>, Var<T>> extract_features(const Var<T>& x_aux,
                                                             const Var<T>& y_tar) const;

    [[nodiscard]] ForwardOutput<T> forward(const Var<T>& x_aux, const Var<T>& y_tar,
                                           bool capture_diagnostics = false) const;

private:
    ModelConfig cfg_;
    ParamStore<T> params_;
};

}  // namespace msr::nn
