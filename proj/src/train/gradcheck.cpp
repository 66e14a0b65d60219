#include "msr/train/gradcheck.hpp"

#include <cmath>
#include <functional>
#include <algorithm>
#include <map>
#include <memory>
#include <random>

#include "msr/nn/model.hpp"

namespace msr::train {
namespace {

using nn::ParamStore;
using nn::Rng;
using nn::Var;

// A block under test: the tensors to differentiate against (inputs and
// parameters alike) and a closure recomputing the output from their values.
struct CaseInstance {
    std::shared_ptr<void> owner;
    std::vector<std::pair<std::string, Var<double>>> tensors;
    std::function<Var<double>()> forward;

    void add_params(const ParamStore<double>& store) {
        for (const auto& e : store.entries()) tensors.emplace_back(e.name, e.var);
    }
};

Var<double> random_input(Shape s, Rng& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    Tensor<double> t(s);
    for (auto& v : t.vec()) v = dist(rng);
    return nn::leaf(std::move(t), true);
}

// Randomises every parameter, including biases that start at zero.
void randomise(ParamStore<double>& store, Rng& rng, double scale = 0.5) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    for (const auto& e : store.entries()) {
        for (auto& v : e.var->value.vec()) v = dist(rng);
    }
}

// y = x * x with the backward pass claiming dy/dx = x.
Var<double> broken_square(const Var<double>& x) {
    Tensor<double> out = x->value;
    for (auto& v : out.vec()) v = v * v;
    return nn::make_result<double>(std::move(out), {x}, "broken_square", [](nn::Node<double>& self) {
        auto& p = self.parents[0];
        auto& g = p->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * p->value[i];
    });
}

using CaseFactory = std::function<CaseInstance(Rng&)>;

// Builds a case around a parameter store populated by `init`.
template <typename Init, typename Forward>
CaseInstance store_case(Rng& rng, Init init, Forward forward) {
    auto store = std::make_shared<ParamStore<double>>();
    init(*store, rng);
    randomise(*store, rng);
    CaseInstance c;
    c.owner = store;
    forward(c, *store, rng);
    c.add_params(*store);
    return c;
}

const std::map<std::string, CaseFactory>& registry() {
    static const std::map<std::string, CaseFactory> cases = {
        {"conv",
         [](Rng& rng) {
             return store_case(
                 rng, [](ParamStore<double>& p, Rng& r) { nn::add_conv(p, "conv", 3, 4, 3, r); },
                 [](CaseInstance& c, const ParamStore<double>& p, Rng& r) {
                     auto x = random_input({1, 3, 6, 6}, r);
                     c.tensors = {{"x", x}};
                     c.forward = [&p, x] { return nn::conv(p, "conv", x); };
                 });
         }},
        {"pixel_shuffle",
         [](Rng& rng) {
             CaseInstance c;
             auto x = random_input({1, 8, 3, 3}, rng);
             c.tensors = {{"x", x}};
             c.forward = [x] { return nn::pixel_shuffle(x, 2); };
             return c;
         }},
        {"residual_group",
         [](Rng& rng) {
             return store_case(
                 rng, [](ParamStore<double>& p, Rng& r) { nn::add_residual_group(p, "rg", 4, 2, r); },
                 [](CaseInstance& c, const ParamStore<double>& p, Rng& r) {
                     auto x = random_input({1, 4, 6, 6}, r);
                     c.tensors = {{"x", x}};
                     c.forward = [&p, x] { return nn::residual_group(p, "rg", x, 2); };
                 });
         }},
        {"m_att",
         [](Rng& rng) {
             return store_case(
                 rng, [](ParamStore<double>& p, Rng& r) { nn::add_channel_spatial_attention(p, "m_att", r); },
                 [](CaseInstance& c, const ParamStore<double>& p, Rng& r) {
                     auto x = random_input({1, 4, 6, 6}, r);
                     c.tensors = {{"x", x}};
                     c.forward = [&p, x] { return nn::channel_spatial_attention(p, "m_att", x); };
                 });
         }},
        {"sep_attention",
         [](Rng& rng) {
             return store_case(
                 rng, [](ParamStore<double>& p, Rng& r) { nn::add_separable_attention(p, "sep", 4, r); },
                 [](CaseInstance& c, const ParamStore<double>& p, Rng& r) {
                     auto fa = random_input({1, 4, 6, 6}, r);
                     auto ft = random_input({1, 4, 6, 6}, r);
                     c.tensors = {{"f_aux", fa}, {"f_tar", ft}};
                     c.forward = [&p, fa, ft] { return nn::separable_attention(p, "sep", fa, ft); };
                 });
         }},
        {"m_int",
         [](Rng& rng) {
             CaseInstance c;
             std::vector<Var<double>> stages;
             for (int l = 0; l < 4; ++l) {
                 stages.push_back(random_input({1, 3, 4, 4}, rng, 0.5));
                 c.tensors.emplace_back("stage" + std::to_string(l), stages.back());
             }
             c.forward = [stages] { return nn::multi_stage_integration(stages); };
             return c;
         }},
        {"full_forward",
         [](Rng& rng) {
             nn::ModelConfig cfg;
             cfg.scale = 2;
             cfg.groups = 2;
             cfg.channels = 8;
             cfg.blocks = 2;
             auto model = std::make_shared<nn::SANet<double>>(cfg, rng());
             // Keep the initialisation's weight scale (deep stacks of larger random
             // weights amplify curvature past what a 1e-3 step resolves), but
             // give biases nonzero values so their gradients are exercised.
             for (const auto& e : model->params().entries()) {
                 if (e.name.ends_with(".b")) {
                     std::uniform_real_distribution<double> dist(-0.1, 0.1);
                     for (auto& v : e.var->value.vec()) v = dist(rng);
                 }
             }
             CaseInstance c;
             c.owner = model;
             auto xa = random_input({1, 1, 16, 16}, rng);
             auto yt = random_input({1, 1, 8, 8}, rng);
             c.tensors = {{"x_aux", xa}, {"y_tar", yt}};
             c.add_params(model->params());
             c.forward = [m = model.get(), xa, yt] {
                 const auto out = m->forward(xa, yt);
                 return nn::concat_channels<double>({out.sr_tar, out.sr_aux});
             };
             return c;
         }},
        {kNegativeControlBlock,
         [](Rng& rng) {
             CaseInstance c;
             auto x = random_input({1, 2, 3, 3}, rng);
             c.tensors = {{"x", x}};
             c.forward = [x] { return broken_square(x); };
             return c;
         }},
    };
    return cases;
}

}  // namespace

const std::vector<std::string>& gradcheck_blocks() {
    static const std::vector<std::string> names = {"conv",          "pixel_shuffle", "residual_group",
                                                   "m_att",         "sep_attention", "m_int",
                                                   "full_forward"};
    return names;
}

GradCheckReport grad_check(const std::string& block, const GradCheckOptions& options) {
    const auto& reg = registry();
    const auto it = reg.find(block);
    if (it == reg.end()) throw ConfigError("unknown gradcheck block '" + block + "'");
    if (!(options.step > 0.0) || !(options.tolerance > 0.0)) {
        throw ConfigError("gradcheck step and tolerance must be positive");
    }

    Rng rng(options.seed);
    CaseInstance inst = it->second(rng);

    // Analytic pass, recording every ReLU activation pattern.
    nn::KinkMonitor monitor(nn::KinkMonitor::Mode::kRecord);
    Tensor<double> weights;
    {
        const Var<double> y = inst.forward();
        weights = Tensor<double>(y->value.shape());
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        for (auto& v : weights.vec()) v = dist(rng);
        for (auto& [name, t] : inst.tensors) t->ensure_grad().fill(0.0);
        nn::backward(nn::weighted_sum(y, weights));
    }
    std::vector<Tensor<double>> analytic;
    for (auto& [name, t] : inst.tensors) analytic.push_back(t->ensure_grad());

    auto objective = [&] {
        nn::NoGradGuard no_grad;
        monitor.set_mode(nn::KinkMonitor::Mode::kCompare);
        const Var<double> y = inst.forward();
        double s = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * y->value[i];
        return std::pair{s, monitor.crossed()};
    };

    GradCheckReport report;
    report.block = block;
    report.tolerance = options.tolerance;
    const double h = options.step;
    for (std::size_t k = 0; k < inst.tensors.size(); ++k) {
        const auto& [name, t] = inst.tensors[k];
        auto& values = t->value;
        std::vector<std::size_t> coords;
        if (values.size() <= options.max_coords) {
            for (std::size_t i = 0; i < values.size(); ++i) coords.push_back(i);
        } else {
            std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
            for (std::size_t j = 0; j < options.max_coords; ++j) coords.push_back(pick(rng));
        }
        for (std::size_t i : coords) {
            const double orig = values[i];
            values[i] = orig + h;
            const auto [fp, crossed_p] = objective();
            values[i] = orig - h;
            const auto [fm, crossed_m] = objective();
            values[i] = orig;
            if (crossed_p || crossed_m) {
                ++report.skipped;
                continue;
            }
            const double fd = (fp - fm) / (2.0 * h);
            const double a = analytic[k][i];
            const double denom = std::max({std::abs(a), std::abs(fd), options.abs_floor});
            const double err = std::abs(a - fd) / denom;
            if (++report.checked == 1 || err > report.max_rel_error) {
                report.max_rel_error = err;
                report.worst = name + "[" + std::to_string(i) + "]";
            }
        }
    }
    const std::size_t probes = report.checked + report.skipped;
    report.passed = report.checked > 0 && report.max_rel_error < options.tolerance &&
                    4 * report.skipped <= probes;
    return report;
}

}  // namespace msr::train
