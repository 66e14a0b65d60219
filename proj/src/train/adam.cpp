#include "msr/train/adam.hpp"

#include <cmath>

namespace msr::train {

template <typename T>
void Adam<T>::step(nn::ParamStore<T>& params, std::size_t t) {
    if (t < 1) throw ConfigError("Adam step index must be >= 1");
    const auto& entries = params.entries();
    for (const auto& e : entries) {
        if (e.trainable && !e.var->ensure_grad().all_finite()) {
            throw NumericError("non-finite gradient for parameter " + e.name);
        }
    }
    if (m_.size() != entries.size()) {
        m_.resize(entries.size());
        v_.resize(entries.size());
    }
    const double b1 = cfg_.beta1;
    const double b2 = cfg_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const auto& e = entries[k];
        if (!e.trainable) continue;
        auto& value = e.var->value;
        const auto& grad = e.var->grad;
        auto& m = m_[k];
        auto& v = v_[k];
        if (m.size() != value.size()) {
            m.assign(value.size(), T{0});
            v.assign(value.size(), T{0});
        }
        for (std::size_t i = 0; i < value.size(); ++i) {
            const double g = static_cast<double>(grad[i]);
            const double mi = b1 * static_cast<double>(m[i]) + (1.0 - b1) * g;
            const double vi = b2 * static_cast<double>(v[i]) + (1.0 - b2) * g * g;
            m[i] = static_cast<T>(mi);
            v[i] = static_cast<T>(vi);
            const double update = cfg_.lr * (mi / c1) / (std::sqrt(vi / c2) + cfg_.eps);
            value[i] = static_cast<T>(static_cast<double>(value[i]) - update);
        }
    }
}

template class Adam<float>;
template class Adam<double>;

}  // namespace msr::train
