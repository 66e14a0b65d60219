#include "msr/nn/blocks.hpp"

#include <algorithm>

namespace msr::nn {

template <typename T>
void add_conv(ParamStore<T>& store, const std::string& name, std::size_t cin, std::size_t cout,
              std::size_t k, Rng& rng) {
    store.add(name + ".w", uniform_init<T>(Shape{cout, cin, k, k}, cin * k * k, rng));
    store.add(name + ".b", Tensor<T>(Shape{1, cout, 1, 1}));
}

template <typename T>
Var<T> conv(const ParamStore<T>& store, const std::string& name, const Var<T>& x) {
    return conv2d(x, store.get(name + ".w"), store.get(name + ".b"));
}

template <typename T>
void add_channel_attention(ParamStore<T>& store, const std::string& prefix, std::size_t c, Rng& rng) {
    const std::size_t hidden = std::max<std::size_t>(1, c / kChannelAttentionReduction);
    add_conv(store, prefix + ".down", c, hidden, 1, rng);
    add_conv(store, prefix + ".up", hidden, c, 1, rng);
}

template <typename T>
Var<T> channel_attention(const ParamStore<T>& store, const std::string& prefix, const Var<T>& x) {
    auto z = channel_mean(x);
    z = relu(conv(store, prefix + ".down", z));
    z = sigmoid(conv(store, prefix + ".up", z));
    return scale_channels(x, z);
}

template <typename T>
void add_residual_group(ParamStore<T>& store, const std::string& prefix, std::size_t c,
                        std::size_t blocks, Rng& rng) {
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::string p = prefix + ".rcab" + std::to_string(b);
        add_conv(store, p + ".conv1", c, c, 3, rng);
        add_conv(store, p + ".conv2", c, c, 3, rng);
        add_channel_attention(store, p + ".ca", c, rng);
    }
    add_conv(store, prefix + ".tail", c, c, 3, rng);
}

template <typename T>
Var<T> residual_group(const ParamStore<T>& store, const std::string& prefix, const Var<T>& x,
                      std::size_t blocks) {
    Var<T> y = x;
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::string p = prefix + ".rcab" + std::to_string(b);
        auto r = conv(store, p + ".conv2", relu(conv(store, p + ".conv1", y)));
        y = add(y, channel_attention(store, p + ".ca", r));
    }
    return add(x, conv(store, prefix + ".tail", y));
}

template <typename T>
void add_channel_spatial_attention(ParamStore<T>& store, const std::string& prefix, Rng& rng) {
    store.add(prefix + ".w", uniform_init<T>(Shape{1, 3, 3, 3}, 27, rng));
    store.add(prefix + ".b", Tensor<T>(Shape{1, 1, 1, 1}));
}

template <typename T>
Var<T> channel_spatial_attention(const ParamStore<T>& store, const std::string& prefix,
                                 const Var<T>& x) {
    auto gate = sigmoid(conv3d_volume(x, store.get(prefix + ".w"), store.get(prefix + ".b")));
    return add(mul(gate, x), x);
}

template <typename T>
void add_separable_attention(ParamStore<T>& store, const std::string& prefix, std::size_t c,
                             Rng& rng) {
    add_conv(store, prefix + ".reduce", 2 * c, c, 1, rng);
    add_conv(store, prefix + ".q_high", c, c, 3, rng);
    add_conv(store, prefix + ".q_low", c, c, 3, rng);
    add_conv(store, prefix + ".q_out", 2 * c, c, 3, rng);
}

template <typename T>
Var<T> separable_attention(const ParamStore<T>& store, const std::string& prefix,
                           const Var<T>& f_aux, const Var<T>& f_tar, AttentionPair<T>* maps) {
    if (f_aux->value.shape() != f_tar->value.shape()) {
        throw ShapeError("separable_attention: branch shapes differ " + to_string(f_aux->value.shape()) +
                         " vs " + to_string(f_tar->value.shape()));
    }
    auto a_h = sigmoid(f_aux);
    auto a_l = one_minus(a_h);
    if (maps != nullptr) {
        maps->a_h = a_h->value;
        maps->a_l = a_l->value;
    }
    auto fused = conv(store, prefix + ".reduce", concat_channels<T>({f_aux, f_tar}));
    auto high = relu(conv(store, prefix + ".q_high", mul(fused, a_h)));
    auto low = relu(conv(store, prefix + ".q_low", mul(fused, a_l)));
    auto r = relu(conv(store, prefix + ".q_out", concat_channels<T>({high, low})));
    return add(r, f_tar);
}

template <typename T>
Var<T> multi_stage_integration(const std::vector<Var<T>>& stages, Tensor<T>* affinity) {
    if (stages.size() < 2) {
        throw ConfigError("multi_stage_integration needs at least 2 stage features, got " +
                          std::to_string(stages.size()));
    }
    return stage_integration(stages, affinity);
}

#define MSR_INSTANTIATE_BLOCKS(T)                                                                 \
    template void add_conv(ParamStore<T>&, const std::string&, std::size_t, std::size_t,          \
                           std::size_t, Rng&);                                                    \
    template Var<T> conv(const ParamStore<T>&, const std::string&, const Var<T>&);                \
    template void add_channel_attention(ParamStore<T>&, const std::string&, std::size_t, Rng&);   \
    template Var<T> channel_attention(const ParamStore<T>&, const std::string&, const Var<T>&);   \
    template void add_residual_group(ParamStore<T>&, const std::string&, std::size_t,             \
                                     std::size_t, Rng&);                                          \
    template Var<T> residual_group(const ParamStore<T>&, const std::string&, const Var<T>&,       \
                                   std::size_t);                                                  \
    template void add_channel_spatial_attention(ParamStore<T>&, const std::string&, Rng&);        \
    template Var<T> channel_spatial_attention(const ParamStore<T>&, const std::string&,           \
                                              const Var<T>&);                                     \
    template void add_separable_attention(ParamStore<T>&, const std::string&, std::size_t, Rng&); \
    template Var<T> separable_attention(const ParamStore<T>&, const std::string&, const Var<T>&,  \
                                        const Var<T>&, AttentionPair<T>*);                        \
    template Var<T> multi_stage_integration(const std::vector<Var<T>>&, Tensor<T>*);

MSR_INSTANTIATE_BLOCKS(float)
MSR_INSTANTIATE_BLOCKS(double)

}  // namespace msr::nn
