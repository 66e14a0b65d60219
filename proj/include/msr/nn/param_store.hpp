#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "msr/nn/autodiff.hpp"

namespace msr::nn {

using Rng = std::mt19937_64;

// Named learnable parameters in insertion order. Each parameter is a graph
// leaf whose gradient buffer always matches its value's shape.
template <typename T>
class ParamStore {
public:
    struct Entry {
        std::string name;
        Var<T> var;
        bool trainable = true;
    };

    // Throws ConfigError on duplicate names.
    const Var<T>& add(const std::string& name, Tensor<T> init, bool trainable = true) {
        if (index_.contains(name)) throw ConfigError("duplicate parameter name: " + name);
        auto v = leaf(std::move(init), trainable);
        v->ensure_grad();
        index_.emplace(name, entries_.size());
        entries_.push_back({name, std::move(v), trainable});
        return entries_.back().var;
    }

    [[nodiscard]] bool contains(const std::string& name) const { return index_.contains(name); }

    // Throws ConfigError for unknown names.
    [[nodiscard]] const Var<T>& get(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw ConfigError("unknown parameter: " + name);
        return entries_[it->second].var;
    }

    [[nodiscard]] const std::vector<Entry>& entries() const noexcept { return entries_; }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }

    void zero_grads() {
        for (auto& e : entries_) e.var->ensure_grad().fill(T{0});
    }

    [[nodiscard]] std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& e : entries_) n += e.var->value.size();
        return n;
    }

    // Copies values from another store with identical names and shapes.
    template <typename U>
    void copy_values_from(const ParamStore<U>& other) {
        for (const auto& e : other.entries()) {
            const Var<T>& dst = get(e.name);
            require_same_shape(dst->value, e.var->value.template cast<T>(), e.name.c_str());
            dst->value = e.var->value.template cast<T>();
        }
    }

private:
    std::vector<Entry> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

// Uniform in +-1/sqrt(fan_in).
template <typename T>
Tensor<T> uniform_init(Shape shape, std::size_t fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Tensor<T> t(shape);
    for (auto& v : t.vec()) v = static_cast<T>(dist(rng));
    return t;
}

}  // namespace msr::nn
