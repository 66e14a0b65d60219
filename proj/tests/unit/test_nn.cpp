#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "helpers.hpp"
#include "msr/nn/model.hpp"
#include "msr/simd/kernels.hpp"

using namespace msr;
using namespace msr::nn;
using test::Rng;

namespace {

// Direct sliding-window convolution with zero padding.
template <typename T>
Tensor<T> conv_oracle(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>* b) {
    const Shape xs = x.shape();
    const Shape ws = w.shape();
    const long pad = static_cast<long>(ws.h / 2);
    Tensor<T> y(Shape{xs.n, ws.n, xs.h, xs.w});
    for (std::size_t n = 0; n < xs.n; ++n) {
        for (std::size_t co = 0; co < ws.n; ++co) {
            for (std::size_t r = 0; r < xs.h; ++r) {
                for (std::size_t c = 0; c < xs.w; ++c) {
                    double acc = b ? static_cast<double>((*b)[co]) : 0.0;
                    for (std::size_t ci = 0; ci < xs.c; ++ci) {
                        for (std::size_t i = 0; i < ws.h; ++i) {
                            for (std::size_t j = 0; j < ws.w; ++j) {
                                const long rr = static_cast<long>(r + i) - pad;
                                const long cc = static_cast<long>(c + j) - pad;
                                if (rr < 0 || cc < 0 || rr >= long(xs.h) || cc >= long(xs.w)) continue;
                                acc += static_cast<double>(w.at(co, ci, i, j)) *
                                       static_cast<double>(x.at(n, ci, std::size_t(rr), std::size_t(cc)));
                            }
                        }
                    }
                    y.at(n, co, r, c) = static_cast<T>(acc);
                }
            }
        }
    }
    return y;
}

void zero_params(ParamStore<float>& store) {
    for (const auto& e : store.entries()) e.var->value.fill(0.0f);
}

struct BackendRestore {
    simd::Backend saved = simd::active_backend();
    ~BackendRestore() { simd::set_backend(saved); }
};

}  // namespace

// --- conv2d ------------------------------------------------------------------

TEST_CASE("conv2d matches the sliding-window oracle") {
    Rng rng(1);
    for (auto [n, ci, co, k, h, w] : {std::array<std::size_t, 6>{1, 2, 1, 3, 5, 5},
                                      {1, 2, 4, 3, 5, 5},
                                      {2, 3, 5, 5, 7, 6},
                                      {2, 4, 3, 1, 4, 9},
                                      {1, 1, 2, 3, 1, 1}}) {
        auto x = constant(test::random_tensor<float>({n, ci, h, w}, rng));
        auto wt = constant(test::random_tensor<float>({co, ci, k, k}, rng));
        auto b = constant(test::random_tensor<float>({1, co, 1, 1}, rng));
        const auto y = conv2d(x, wt, b);
        CHECK(test::max_abs_diff(y->value, conv_oracle(x->value, wt->value, &b->value)) < 1e-5);
        const auto y0 = conv2d(x, wt, Var<float>{});
        CHECK(test::max_abs_diff(y0->value, conv_oracle<float>(x->value, wt->value, nullptr)) < 1e-5);
    }
}

TEST_CASE("conv2d is the same under every kernel backend") {
    if (!simd::backend_supported(simd::Backend::kAvx2)) return;
    BackendRestore restore;
    Rng rng(2);
    auto x = leaf(test::random_tensor<float>({2, 16, 12, 12}, rng));
    auto wt = leaf(test::random_tensor<float>({16, 16, 3, 3}, rng));
    auto b = leaf(test::random_tensor<float>({1, 16, 1, 1}, rng));
    const Tensor<float> seed = test::random_tensor<float>({2, 16, 12, 12}, rng);

    std::array<std::array<Tensor<float>, 4>, 2> results;
    for (int i = 0; i < 2; ++i) {
        simd::set_backend(i == 0 ? simd::Backend::kScalar : simd::Backend::kAvx2);
        for (auto& v : {x, wt, b}) v->grad = Tensor<float>();
        const auto y = conv2d(x, wt, b);
        backward(y, seed);
        results[i] = {y->value, x->grad, wt->grad, b->grad};
    }
    for (std::size_t k = 0; k < 4; ++k) {
        double peak = 1.0;
        for (float v : results[0][k].vec()) peak = std::max(peak, double(std::abs(v)));
        CHECK(test::max_abs_diff(results[0][k], results[1][k]) < 1e-5 * peak);
    }
}

TEST_CASE("conv2d identity and bias-only cases") {
    Rng rng(3);
    auto x = constant(test::random_tensor<float>({1, 3, 4, 4}, rng));
    Tensor<float> eye({3, 3, 1, 1});
    for (std::size_t c = 0; c < 3; ++c) eye.at(c, c, 0, 0) = 1.0f;
    CHECK(conv2d(x, constant(eye), Var<float>{})->value.vec() == x->value.vec());

    auto zero_w = constant(Tensor<float>({2, 3, 3, 3}));
    Tensor<float> bias({1, 2, 1, 1});
    bias[0] = 0.25f;
    bias[1] = -1.5f;
    const auto y = conv2d(x, zero_w, constant(bias));
    for (std::size_t r = 0; r < 4; ++r) {
        for (std::size_t c = 0; c < 4; ++c) {
            CHECK(y->value.at(0, 0, r, c) == 0.25f);
            CHECK(y->value.at(0, 1, r, c) == -1.5f);
        }
    }
}

TEST_CASE("conv2d shape errors") {
    auto x = constant(Tensor<float>({1, 3, 4, 4}));
    CHECK_THROWS_AS(conv2d(x, constant(Tensor<float>({2, 2, 3, 3})), Var<float>{}), ShapeError);
    CHECK_THROWS_AS(conv2d(x, constant(Tensor<float>({2, 3, 2, 2})), Var<float>{}), ShapeError);
    CHECK_THROWS_AS(conv2d(x, constant(Tensor<float>({2, 3, 3, 3})), constant(Tensor<float>({1, 3, 1, 1}))),
                    ShapeError);
}

// --- pixel shuffle -----------------------------------------------------------

TEST_CASE("pixel shuffle follows the index map") {
    Tensor<float> t({1, 4, 1, 1}, std::vector<float>{1, 2, 3, 4});
    const auto y = pixel_shuffle(constant(t), 2);
    CHECK(y->value.shape() == Shape{1, 1, 2, 2});
    CHECK(y->value.vec() == std::vector<float>{1, 2, 3, 4});

    Rng rng(4);
    const auto x = test::random_tensor<float>({2, 8, 3, 2}, rng);
    const auto z = pixel_shuffle(constant(x), 2)->value;
    CHECK(z.shape() == Shape{2, 2, 6, 4});
    for (std::size_t n = 0; n < 2; ++n) {
        for (std::size_t c = 0; c < 8; ++c) {
            for (std::size_t h = 0; h < 3; ++h) {
                for (std::size_t w = 0; w < 2; ++w) {
                    CHECK(z.at(n, c / 4, 2 * h + (c % 4) / 2, 2 * w + (c % 4) % 2) == x.at(n, c, h, w));
                }
            }
        }
    }
    auto a = x.vec();
    auto b = z.vec();
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
}

TEST_CASE("pixel shuffle identity and errors") {
    Rng rng(5);
    const auto x = test::random_tensor<float>({1, 4, 2, 2}, rng);
    CHECK(pixel_shuffle(constant(x), 1)->value.vec() == x.vec());
    CHECK(pixel_shuffle(constant(x), 2)->value.shape() == Shape{1, 1, 4, 4});
    CHECK_THROWS_AS(pixel_shuffle(constant(Tensor<float>({1, 6, 2, 2})), 2), ShapeError);
}

// --- elementwise and autodiff -----------------------------------------------

TEST_CASE("reverse mode accumulates through shared subexpressions") {
    auto a = leaf(Tensor<double>({1, 1, 1, 2}, std::vector<double>{2.0, -3.0}));
    auto b = leaf(Tensor<double>({1, 1, 1, 2}, std::vector<double>{0.5, 4.0}));
    // y = sum(a*b + a) -> dy/da = b + 1, dy/db = a
    const auto y = weighted_sum(add(mul(a, b), a), Tensor<double>({1, 1, 1, 2}, 1.0));
    backward(y);
    CHECK(a->grad.vec() == std::vector<double>{1.5, 5.0});
    CHECK(b->grad.vec() == std::vector<double>{2.0, -3.0});
}

TEST_CASE("no-grad mode records nothing") {
    auto a = leaf(Tensor<float>({1, 1, 1, 1}, 2.0f));
    NoGradGuard guard;
    const auto y = mul(a, a);
    CHECK_FALSE(y->requires_grad);
    CHECK(y->parents.empty());
}

TEST_CASE("numeric checks flag non-finite outputs") {
    const bool prev = numeric_checks_enabled();
    set_numeric_checks(true);
    auto a = constant(Tensor<float>({1, 1, 1, 1}, std::numeric_limits<float>::infinity()));
    auto z = constant(Tensor<float>({1, 1, 1, 1}, 0.0f));
    CHECK_THROWS_AS(mul(a, z), NumericError);
    set_numeric_checks(prev);
}

TEST_CASE("sigmoid gates stay in the open unit interval and pair to one") {
    Tensor<float> t({1, 1, 1, 7}, std::vector<float>{-1000.0f, -90.0f, -17.0f, 0.0f, 17.0f, 90.0f, 1000.0f});
    const auto a = sigmoid(constant(t));
    const auto l = one_minus(a);
    for (std::size_t i = 0; i < t.size(); ++i) {
        CHECK(a->value[i] > 0.0f);
        CHECK(a->value[i] < 1.0f);
        CHECK(a->value[i] + l->value[i] == 1.0f);
    }
    CHECK(a->value[3] == 0.5f);
}

// --- stage integration -------------------------------------------------------

TEST_CASE("stage integration rows are stochastic") {
    Rng rng(6);
    std::vector<Var<double>> stages;
    for (int i = 0; i < 4; ++i) stages.push_back(constant(test::random_tensor<double>({2, 3, 4, 4}, rng)));
    Tensor<double> s;
    const auto h = multi_stage_integration(stages, &s);
    CHECK(h->value.shape() == Shape{2, 12, 4, 4});
    CHECK(s.shape() == Shape{2, 1, 4, 4});
    for (std::size_t n = 0; n < 2; ++n) {
        for (std::size_t i = 0; i < 4; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < 4; ++j) {
                CHECK(s.at(n, 0, i, j) >= 0.0);
                row += s.at(n, 0, i, j);
            }
            CHECK(std::abs(row - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("identical stages give uniform affinity and doubled features") {
    Rng rng(7);
    const auto f = test::random_tensor<double>({1, 2, 3, 3}, rng, -0.3, 0.3);
    std::vector<Var<double>> stages(4, constant(f));
    Tensor<double> s;
    const auto h = multi_stage_integration(stages, &s);
    for (double v : s.vec()) CHECK(std::abs(v - 0.25) < 1e-12);
    for (std::size_t l = 0; l < 4; ++l) {
        for (std::size_t c = 0; c < 2; ++c) {
            for (std::size_t i = 0; i < 9; ++i) {
                CHECK(std::abs(h->value[(l * 2 + c) * 9 + i] - 2.0 * f[c * 9 + i]) < 1e-12);
            }
        }
    }
}

TEST_CASE("a dominant orthogonal stage attends to itself") {
    Rng rng(8);
    std::vector<Var<double>> stages;
    Tensor<double> big({1, 1, 2, 2});
    big[0] = 10.0;  // support disjoint from the small stages
    for (int i = 0; i < 3; ++i) {
        Tensor<double> t({1, 1, 2, 2});
        t[1 + i] = 0.1 * (i + 1);
        stages.push_back(constant(t));
    }
    stages.insert(stages.begin() + 1, constant(big));
    Tensor<double> s;
    (void)multi_stage_integration(stages, &s);
    for (std::size_t j = 0; j < 4; ++j) {
        if (j != 1) CHECK(s.at(0, 0, 1, 1) > s.at(0, 0, 1, j));
    }
}

TEST_CASE("stage integration needs two stages") {
    std::vector<Var<float>> one{constant(Tensor<float>({1, 1, 2, 2}))};
    CHECK_THROWS_AS(multi_stage_integration(one), ConfigError);
}

// --- blocks ------------------------------------------------------------------

TEST_CASE("residual group with a zero body is the identity") {
    Rng rng(9);
    ParamStore<float> p;
    add_residual_group(p, "rg", 4, 2, rng);
    auto x = constant(test::random_tensor<float>({2, 4, 5, 5}, rng));
    CHECK(residual_group(p, "rg", x, 2)->value.shape() == x->value.shape());
    zero_params(p);
    CHECK(residual_group(p, "rg", x, 2)->value.vec() == x->value.vec());
}

TEST_CASE("channel attention is equivariant under channel permutation") {
    Rng rng(10);
    ParamStore<double> p;
    add_channel_attention(p, "ca", 8, rng);
    ParamStore<double> q;
    add_channel_attention(q, "ca", 8, rng);
    const std::array<std::size_t, 8> perm{3, 0, 7, 1, 6, 2, 5, 4};
    // q's down layer reads permuted inputs; its up layer writes permuted outputs.
    const auto& pd = p.get("ca.down.w")->value;
    auto& qd = q.get("ca.down.w")->value;
    for (std::size_t o = 0; o < pd.shape().n; ++o) {
        for (std::size_t c = 0; c < 8; ++c) qd.at(o, c, 0, 0) = pd.at(o, perm[c], 0, 0);
    }
    q.get("ca.down.b")->value = p.get("ca.down.b")->value;
    const auto& pu = p.get("ca.up.w")->value;
    auto& qu = q.get("ca.up.w")->value;
    auto& pb = p.get("ca.up.b")->value;
    for (std::size_t c = 0; c < 8; ++c) pb[c] = 0.1 * double(c) - 0.3;
    for (std::size_t c = 0; c < 8; ++c) {
        for (std::size_t i = 0; i < pu.shape().c; ++i) qu.at(c, i, 0, 0) = pu.at(perm[c], i, 0, 0);
        q.get("ca.up.b")->value[c] = pb[perm[c]];
    }

    const auto x = test::random_tensor<double>({1, 8, 3, 3}, rng);
    Tensor<double> xp(x.shape());
    for (std::size_t c = 0; c < 8; ++c) {
        for (std::size_t i = 0; i < 9; ++i) xp[c * 9 + i] = x[perm[c] * 9 + i];
    }
    const auto y = channel_attention(p, "ca", constant(x))->value;
    const auto yp = channel_attention(q, "ca", constant(xp))->value;
    for (std::size_t c = 0; c < 8; ++c) {
        for (std::size_t i = 0; i < 9; ++i) CHECK(std::abs(yp[c * 9 + i] - y[perm[c] * 9 + i]) < 1e-12);
    }
}

TEST_CASE("channel attention scales channels with equal statistics equally") {
    Rng rng(11);
    ParamStore<double> p;
    add_channel_attention(p, "ca", 4, rng);
    // Identical up-layer rows make the gate depend on the channel means only.
    auto& up = p.get("ca.up.w")->value;
    for (std::size_t c = 1; c < 4; ++c) up.at(c, 0, 0, 0) = up.at(0, 0, 0, 0);
    Tensor<double> x({1, 4, 2, 2});
    const std::array<double, 4> base{0.1, 0.9, 0.4, 0.6};
    for (std::size_t c = 0; c < 4; ++c) {
        for (std::size_t i = 0; i < 4; ++i) x[c * 4 + i] = base[(i + c) % 4];  // same mean per channel
    }
    const auto y = channel_attention(p, "ca", constant(x))->value;
    const double g0 = y[0] / x[0];
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(std::abs(y[i] / x[i] - g0) < 1e-12);
}

TEST_CASE("channel-spatial attention reduces to 1.5x with zero weights") {
    Rng rng(12);
    ParamStore<float> p;
    add_channel_spatial_attention(p, "att", rng);
    auto x = constant(test::random_tensor<float>({2, 8, 16, 16}, rng, 0.0, 1.0));
    const auto g = channel_spatial_attention(p, "att", x);
    CHECK(g->value.shape() == x->value.shape());
    for (std::size_t i = 0; i < x->value.size(); ++i) CHECK(g->value[i] >= x->value[i]);
    zero_params(p);
    const auto z = channel_spatial_attention(p, "att", x);
    for (std::size_t i = 0; i < x->value.size(); ++i) {
        CHECK(z->value[i] == doctest::Approx(1.5 * x->value[i]).epsilon(1e-6));
    }
}

TEST_CASE("separable attention invariants") {
    Rng rng(13);
    ParamStore<float> p;
    add_separable_attention(p, "sep", 4, rng);
    auto fa = constant(test::random_tensor<float>({2, 4, 5, 5}, rng, -20.0, 20.0));
    auto ft = constant(test::random_tensor<float>({2, 4, 5, 5}, rng));

    AttentionPair<float> maps;
    const auto r = separable_attention(p, "sep", fa, ft, &maps);
    CHECK(r->value.shape() == ft->value.shape());
    for (std::size_t i = 0; i < maps.a_h.size(); ++i) {
        CHECK(maps.a_h[i] + maps.a_l[i] == 1.0f);
        CHECK(maps.a_h[i] > 0.0f);
        CHECK(maps.a_h[i] < 1.0f);
    }

    auto zero_aux = constant(Tensor<float>({2, 4, 5, 5}));
    (void)separable_attention(p, "sep", zero_aux, ft, &maps);
    for (std::size_t i = 0; i < maps.a_h.size(); ++i) {
        CHECK(maps.a_h[i] == 0.5f);
        CHECK(maps.a_l[i] == 0.5f);
    }

    zero_params(p);
    CHECK(separable_attention(p, "sep", fa, ft)->value.vec() == ft->value.vec());

    auto wrong = constant(Tensor<float>({2, 4, 4, 5}));
    CHECK_THROWS_AS(separable_attention(p, "sep", wrong, ft), ShapeError);
}

TEST_CASE("parameter store bookkeeping") {
    Rng rng(14);
    ParamStore<float> p;
    add_conv(p, "c", 2, 3, 3, rng);
    CHECK(p.size() == 2);
    CHECK(p.parameter_count() == 3 * 2 * 9 + 3);
    CHECK_THROWS_AS(add_conv(p, "c", 2, 3, 3, rng), ConfigError);
    CHECK_THROWS_AS((void)p.get("nope"), ConfigError);
    const double bound = 1.0 / std::sqrt(18.0);
    for (float v : p.get("c.w")->value.vec()) CHECK(std::abs(v) <= bound);
    for (float v : p.get("c.b")->value.vec()) CHECK(v == 0.0f);
    p.get("c.w")->grad.fill(3.0f);
    p.zero_grads();
    for (const auto& e : p.entries()) {
        CHECK(e.var->grad.shape() == e.var->value.shape());
        for (float g : e.var->grad.vec()) CHECK(g == 0.0f);
    }
}

// --- model -------------------------------------------------------------------

TEST_CASE("ablation lattice flags") {
    const auto ab1 = ablation_config("Ab1");
    CHECK_FALSE(ab1.use_aux);
    CHECK_FALSE(ab1.use_sep_attention);
    CHECK_FALSE(ab1.use_m_int);
    CHECK_FALSE(ab1.use_m_att);
    const auto ab2 = ablation_config("Ab2");
    CHECK_FALSE(ab2.use_aux);
    CHECK_FALSE(ab2.use_m_int);
    CHECK(ab2.use_m_att);
    CHECK_FALSE(ab2.use_sep_attention);
    const auto ab3 = ablation_config("Ab3");
    CHECK(ab3.use_aux);
    CHECK(ab3.use_m_att);
    CHECK_FALSE(ab3.use_m_int);
    CHECK_FALSE(ab3.use_sep_attention);
    const auto ab4 = ablation_config("Ab4");
    CHECK(ab4.use_aux);
    CHECK(ab4.use_m_int);
    CHECK(ab4.use_m_att);
    CHECK_FALSE(ab4.use_sep_attention);
    const auto full = ablation_config("full");
    CHECK(full.use_aux);
    CHECK(full.use_m_int);
    CHECK(full.use_m_att);
    CHECK(full.use_sep_attention);
    CHECK(full.groups == 2);
    CHECK(full.channels == 16);
    CHECK_THROWS_AS((void)ablation_config("Ab5"), ConfigError);
    CHECK(ablation_names().size() == 5);

    const auto standard = standard_model_profile();
    CHECK(standard.groups == 6);
    CHECK(standard.channels == 32);
    CHECK(standard.alpha == 0.7);
}

TEST_CASE("model configuration invariants") {
    ModelConfig c = desk_model_profile();
    c.use_aux = false;
    CHECK_THROWS_AS(c.validate(), ConfigError);  // separable attention needs aux
    CHECK_THROWS_AS(SANet<float>(c, 0), ConfigError);
    c = desk_model_profile();
    c.channels = 3;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = desk_model_profile();
    c.groups = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("forward output shapes") {
    Rng rng(15);
    for (std::size_t s : {1, 2, 3}) {
        ModelConfig c = desk_model_profile();
        c.channels = 4;
        c.scale = s;
        SANet<float> m(c, 1);
        auto y = constant(test::random_tensor<float>({2, 1, 6, 6}, rng));
        auto xa = constant(test::random_tensor<float>({2, 1, 6 * s, 6 * s}, rng));
        const auto [fa, ft] = m.extract_features(xa, y);
        CHECK(fa->value.shape() == Shape{2, 4, 6 * s, 6 * s});
        CHECK(ft->value.shape() == Shape{2, 4, 6 * s, 6 * s});
        const auto out = m.forward(xa, y);
        CHECK(out.sr_tar->value.shape() == Shape{2, 1, 6 * s, 6 * s});
        CHECK(out.sr_aux->value.shape() == Shape{2, 1, 6 * s, 6 * s});
        auto bad = constant(Tensor<float>({2, 1, 6 * s + 1, 6 * s}));
        CHECK_THROWS_AS((void)m.forward(bad, y), ShapeError);
    }
}

TEST_CASE("zero inputs and zero biases give zero features") {
    SANet<float> m(desk_model_profile(), 2);
    const auto [fa, ft] = m.extract_features(constant(Tensor<float>({1, 1, 16, 16})),
                                             constant(Tensor<float>({1, 1, 8, 8})));
    for (float v : fa->value.vec()) CHECK(v == 0.0f);
    for (float v : ft->value.vec()) CHECK(v == 0.0f);
}

TEST_CASE("a zero network outputs its reconstruction bias") {
    for (const auto& name : ablation_names()) {
        SANet<float> m(ablation_config(name), 3);
        zero_params(m.params());
        m.params().get("recon.tar.b")->value[0] = 0.25f;
        Rng rng(16);
        const auto out = m.forward(constant(test::random_tensor<float>({1, 1, 16, 16}, rng)),
                                   constant(test::random_tensor<float>({1, 1, 8, 8}, rng)));
        for (float v : out.sr_tar->value.vec()) CHECK(v == 0.25f);
        CHECK(out.sr_tar->value.all_finite());
    }
}

TEST_CASE("Ab1 ignores the auxiliary image") {
    Rng rng(17);
    SANet<float> m(ablation_config("Ab1"), 4);
    auto y = constant(test::random_tensor<float>({2, 1, 8, 8}, rng));
    const auto a = m.forward(constant(test::random_tensor<float>({2, 1, 16, 16}, rng)), y);
    const auto b = m.forward(constant(test::random_tensor<float>({2, 1, 16, 16}, rng)), y);
    const auto c = m.forward(Var<float>{}, y);
    CHECK(a.sr_tar->value.vec() == b.sr_tar->value.vec());
    CHECK(a.sr_tar->value.vec() == c.sr_tar->value.vec());
    CHECK_FALSE(a.sr_aux);
    for (const auto& e : m.params().entries()) CHECK(e.name.find("aux") == std::string::npos);
}

TEST_CASE("diagnostics expose per-stage attention and the affinity") {
    Rng rng(18);
    SANet<float> m(desk_model_profile(), 5);
    const auto out = m.forward(constant(test::random_tensor<float>({2, 1, 16, 16}, rng)),
                               constant(test::random_tensor<float>({2, 1, 8, 8}, rng)), true);
    REQUIRE(out.diagnostics);
    CHECK(out.diagnostics->attention.size() == 2);
    CHECK(out.diagnostics->affinity.shape() == Shape{2, 1, 4, 4});
    for (const auto& pair : out.diagnostics->attention) {
        for (std::size_t i = 0; i < pair.a_h.size(); ++i) CHECK(pair.a_h[i] + pair.a_l[i] == 1.0f);
    }
    CHECK_FALSE(m.forward(constant(Tensor<float>({1, 1, 16, 16})), constant(Tensor<float>({1, 1, 8, 8})))
                    .diagnostics);
}

TEST_CASE("model construction and forward are deterministic") {
    Rng rng(19);
    SANet<float> a(desk_model_profile(), 77);
    SANet<float> b(desk_model_profile(), 77);
    REQUIRE(a.params().size() == b.params().size());
    for (std::size_t i = 0; i < a.params().size(); ++i) {
        CHECK(a.params().entries()[i].name == b.params().entries()[i].name);
        CHECK(a.params().entries()[i].var->value.vec() == b.params().entries()[i].var->value.vec());
    }
    auto xa = constant(test::random_tensor<float>({1, 1, 16, 16}, rng));
    auto y = constant(test::random_tensor<float>({1, 1, 8, 8}, rng));
    CHECK(a.forward(xa, y).sr_tar->value.vec() == b.forward(xa, y).sr_tar->value.vec());
}
