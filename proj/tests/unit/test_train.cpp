#include <cmath>
#include <limits>

#include "json.hpp"

#include "doctest.h"
#include "helpers.hpp"
#include "msr/data/dataset.hpp"
#include "msr/train/adam.hpp"
#include "msr/train/checkpoint.hpp"
#include "msr/train/fit.hpp"
#include "msr/train/gradcheck.hpp"
#include "msr/train/loader.hpp"
#include "msr/train/loss.hpp"
#include "msr/train/metrics.hpp"
#include "msr/train/png.hpp"
#include "msr/train/stats.hpp"

using namespace msr;
using namespace msr::train;
using fourier::Image;
using nn::constant;
using test::Rng;
namespace fs = std::filesystem;

namespace {

nn::Var<double> filled(double v, std::size_t n = 8) {
    return constant(Tensor<double>({1, 1, 1, n}, v));
}

// Two-sided p for Student's t with 4 degrees of freedom, closed form.
double p_two_sided_df4(double t) {
    const double x = std::abs(t) / std::sqrt(t * t + 4.0);
    return 1.0 - x * (1.0 + (1.0 - x * x) / 2.0);
}

nn::ModelConfig tiny_model(const std::string& variant = "full") {
    nn::ModelConfig c = nn::desk_model_profile();
    c.channels = 4;
    c.blocks = 1;
    return nn::ablation_config(variant, c);
}

data::DatasetSpec tiny_data(std::uint64_t seed = 3) {
    data::DatasetSpec s;
    s.seed = seed;
    s.count = 10;
    s.height = 16;
    s.width = 16;
    s.n_shapes = 3;
    return s;
}

}  // namespace

// --- loss --------------------------------------------------------------------

TEST_CASE("joint loss examples") {
    const auto gt = filled(0.5);
    CHECK(joint_loss(filled(0.5), gt, filled(0.5), gt, 0.7)->value[0] == 0.0);
    // alpha = 1 ignores the auxiliary term entirely.
    CHECK(joint_loss(filled(0.8), gt, filled(9.0), gt, 1.0)->value[0] == doctest::Approx(0.3).epsilon(1e-12));
    // Target MAE 0.2, auxiliary MAE 0.1.
    CHECK(joint_loss(filled(0.7), gt, filled(0.4), gt, 0.7)->value[0] ==
          doctest::Approx(0.17).epsilon(1e-12));
    // Missing auxiliary prediction means target only.
    CHECK(joint_loss(filled(0.7), gt, nn::Var<double>{}, nn::Var<double>{}, 0.7)->value[0] ==
          doctest::Approx(0.2).epsilon(1e-12));
    CHECK(joint_loss(filled(0.7), gt, filled(0.4), gt, 0.7, LossKind::kL2)->value[0] ==
          doctest::Approx(0.7 * 0.04 + 0.3 * 0.01).epsilon(1e-12));
    CHECK_THROWS_AS(joint_loss(filled(0.7, 4), gt, filled(0.4), gt, 0.7), ShapeError);
}

TEST_CASE("joint loss is non-negative and its gradient is signed") {
    Rng rng(1);
    auto pred = nn::leaf(test::random_tensor<double>({2, 1, 3, 3}, rng));
    auto gt = constant(test::random_tensor<double>({2, 1, 3, 3}, rng));
    const auto l = joint_loss(pred, gt, nn::Var<double>{}, nn::Var<double>{}, 0.7);
    CHECK(l->value[0] > 0.0);
    nn::backward(l);
    for (std::size_t i = 0; i < 18; ++i) {
        const double sign = pred->value[i] > gt->value[i] ? 1.0 : -1.0;
        CHECK(pred->grad[i] == doctest::Approx(sign / 18.0));
    }
}

// --- Adam --------------------------------------------------------------------

TEST_CASE("Adam leaves parameters alone under zero gradients") {
    nn::ParamStore<float> p;
    p.add("w", Tensor<float>({1, 1, 1, 3}, std::vector<float>{1.0f, -2.0f, 3.0f}));
    Adam<float> opt({1e-2});
    for (std::size_t t = 1; t <= 5; ++t) {
        p.zero_grads();
        opt.step(p, t);
    }
    CHECK(p.get("w")->value.vec() == std::vector<float>{1.0f, -2.0f, 3.0f});
}

TEST_CASE("first Adam step moves by lr against the gradient sign") {
    for (double g : {0.003, -4.0, 250.0}) {
        nn::ParamStore<double> p;
        p.add("w", Tensor<double>({1, 1, 1, 1}, 0.5));
        p.get("w")->grad[0] = g;
        Adam<double> opt({1e-3});
        opt.step(p, 1);
        const double expected = 0.5 - 1e-3 * g / (std::abs(g) + 1e-8);
        CHECK(p.get("w")->value[0] == doctest::Approx(expected).epsilon(1e-12));
        CHECK(std::abs(p.get("w")->value[0] - (0.5 - 1e-3 * (g > 0 ? 1 : -1))) < 1e-8);
    }
}

TEST_CASE("Adam rejects non-finite gradients without updating") {
    nn::ParamStore<float> p;
    p.add("a", Tensor<float>({1, 1, 1, 2}, 1.0f));
    p.add("b", Tensor<float>({1, 1, 1, 2}, 2.0f));
    p.get("a")->grad.fill(0.1f);
    p.get("b")->grad[1] = std::numeric_limits<float>::quiet_NaN();
    Adam<float> opt({1e-2});
    CHECK_THROWS_AS(opt.step(p, 1), NumericError);
    CHECK(p.get("a")->value.vec() == std::vector<float>{1.0f, 1.0f});
    CHECK(p.get("b")->value.vec() == std::vector<float>{2.0f, 2.0f});
}

TEST_CASE("Adam trajectories are deterministic and skip frozen entries") {
    auto run = [] {
        nn::ParamStore<float> p;
        p.add("w", Tensor<float>({1, 1, 1, 4}, 0.0f));
        p.add("frozen", Tensor<float>({1, 1, 1, 1}, 7.0f), false);
        Adam<float> opt({1e-2});
        std::vector<float> traj;
        for (std::size_t t = 1; t <= 10; ++t) {
            for (std::size_t i = 0; i < 4; ++i) p.get("w")->grad[i] = std::sin(float(t * (i + 1)));
            p.get("frozen")->grad[0] = 1.0f;
            opt.step(p, t);
            traj.insert(traj.end(), p.get("w")->value.vec().begin(), p.get("w")->value.vec().end());
        }
        CHECK(p.get("frozen")->value[0] == 7.0f);
        return traj;
    };
    CHECK(run() == run());
}

// --- metrics -----------------------------------------------------------------

TEST_CASE("psnr examples") {
    Rng rng(2);
    const Image gt = test::random_image(16, 16, rng, 0.2, 0.8);
    Image pred = gt;
    CHECK(std::isinf(psnr(pred, gt)));
    CHECK(psnr(pred, gt) > 0);
    for (std::size_t i = 0; i < pred.size(); ++i) pred.data[i] += (i % 2 ? 0.1 : -0.1);
    CHECK(std::abs(psnr(pred, gt) - 20.0) < 1e-6);

    Image hp = pred, hg = gt;
    for (auto& v : hp.data) v *= 0.5;
    for (auto& v : hg.data) v *= 0.5;
    CHECK(std::abs(psnr(hp, hg) - psnr(pred, gt) - 20.0 * std::log10(2.0)) < 1e-9);
    CHECK(std::abs(20.0 * std::log10(2.0) - 6.02) < 0.01);

    double prev = std::numeric_limits<double>::infinity();
    for (double e : {0.01, 0.02, 0.05, 0.1, 0.3}) {
        Image p2 = gt;
        for (auto& v : p2.data) v += e;
        const double cur = psnr(p2, gt);
        CHECK(cur < prev);
        prev = cur;
    }
    CHECK_THROWS_AS((void)psnr(Image(4, 4), Image(4, 5)), ShapeError);
}

TEST_CASE("ssim examples") {
    Rng rng(3);
    const Image a = test::random_image(24, 20, rng);
    const Image b = test::random_image(24, 20, rng);
    CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(ssim(a, b) - ssim(b, a)) < 1e-9);
    CHECK(ssim(a, b) < 0.5);

    const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    for (auto [v1, v2] : {std::pair{0.3, 0.7}, {0.0, 1.0}, {0.5, 0.55}}) {
        const double expected = (2 * v1 * v2 + c1) * c2 / ((v1 * v1 + v2 * v2 + c1) * c2);
        CHECK(ssim(Image(12, 15, v1), Image(12, 15, v2)) == doctest::Approx(expected).epsilon(1e-9));
    }
    CHECK_THROWS_AS((void)ssim(Image(10, 20), Image(10, 20)), ConfigError);
    CHECK_THROWS_AS((void)ssim(Image(12, 12), Image(12, 13)), ShapeError);
}

TEST_CASE("nmse examples") {
    Rng rng(4);
    const Image gt = test::random_image(8, 8, rng, 0.1, 1.0);
    Image twice = gt;
    for (auto& v : twice.data) v *= 2.0;
    CHECK(nmse(gt, gt) == 0.0);
    CHECK(nmse(Image(8, 8), gt) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(nmse(twice, gt) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS((void)nmse(gt, Image(8, 8)), ValueError);
}

TEST_CASE("error map normalisation") {
    Rng rng(5);
    const Image gt = test::random_image(6, 6, rng);
    for (double v : error_map(gt, gt).data) CHECK(v == 0.0);
    Image p = gt;
    for (std::size_t i = 0; i < p.size(); ++i) p.data[i] += (i % 3 ? 0.1 : -0.1);
    for (double v : error_map(p, gt).data) CHECK(v == doctest::Approx(0.5).epsilon(1e-9));
    for (auto& v : p.data) v += 0.5;
    for (double v : error_map(p, gt).data) CHECK(v == 1.0);
}

TEST_CASE("metric reports aggregate per-sample values") {
    MetricReport r;
    r.samples = {{"a", 20.0, 0.5, 0.1}, {"b", 30.0, 0.7, 0.3}};
    summarize(r);
    CHECK(r.mean_psnr == 25.0);
    CHECK(r.mean_ssim == doctest::Approx(0.6));
    CHECK(r.mean_nmse == doctest::Approx(0.2));
    CHECK(r.psnr_values() == std::vector<double>{20.0, 30.0});
    const auto j = to_json(r);
    CHECK(j["aggregate"]["count"] == 2);
    CHECK(j["samples"][1]["id"] == "b");
    CHECK(json_number(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(json_number(std::numeric_limits<double>::quiet_NaN()).is_null());
}

// --- paired t-test -----------------------------------------------------------

TEST_CASE("paired t-test on the five-sample example") {
    const std::vector<double> a{1.2, 0.8, 1.0, 1.1, 0.9};
    const std::vector<double> b(5, 0.0);
    const auto r = paired_t_test(a, b);
    CHECK(r.n == 5);
    CHECK(r.mean_diff == doctest::Approx(1.0));
    CHECK(r.t == doctest::Approx(14.142135623730951).epsilon(1e-12));
    CHECK(r.p < 0.001);
    CHECK(r.p == doctest::Approx(1.451281706131975e-4).epsilon(1e-9));
    CHECK(r.p == doctest::Approx(p_two_sided_df4(r.t)).epsilon(1e-9));
    CHECK_FALSE(r.degenerate);

    const auto s = paired_t_test(b, a);
    CHECK(s.t == -r.t);
    CHECK(s.p == r.p);
}

TEST_CASE("paired t-test matches the closed form for four degrees of freedom") {
    Rng rng(6);
    std::normal_distribution<double> d(0.2, 1.0);
    for (int k = 0; k < 20; ++k) {
        std::vector<double> a(5), b(5);
        for (std::size_t i = 0; i < 5; ++i) {
            a[i] = d(rng);
            b[i] = d(rng) - 0.2;
        }
        const auto r = paired_t_test(a, b);
        CHECK(r.p == doctest::Approx(p_two_sided_df4(r.t)).epsilon(1e-9));
    }
}

TEST_CASE("paired t-test conventions and errors") {
    const std::vector<double> a{0.3, 0.1, 0.4};
    const auto same = paired_t_test(a, a);
    CHECK(same.t == 0.0);
    CHECK(same.p == 1.0);

    const std::vector<double> ones{2.0, 3.0, 4.0, 5.0};
    const std::vector<double> base{1.0, 2.0, 3.0, 4.0};
    const auto deg = paired_t_test(ones, base);
    CHECK(deg.degenerate);
    CHECK(deg.p < 1e-12);
    CHECK(std::isinf(deg.t));
    CHECK(deg.t > 0);

    CHECK_THROWS_AS((void)paired_t_test(a, base), ShapeError);
    const std::vector<double> one{1.0};
    CHECK_THROWS_AS((void)paired_t_test(one, one), ConfigError);
}

// --- gradient checks ---------------------------------------------------------

TEST_CASE("convolution gradients agree to machine precision") {
    const auto r = grad_check("conv");
    CHECK(r.passed);
    CHECK(r.max_rel_error < 1e-9);
    CHECK(r.checked > 0);
}

TEST_CASE("attention and integration gradients agree with finite differences") {
    for (const char* block : {"pixel_shuffle", "sep_attention", "m_int", "m_att", "residual_group"}) {
        const auto r = grad_check(block);
        INFO(block << " " << r.max_rel_error << " at " << r.worst);
        CHECK(r.passed);
        CHECK(r.max_rel_error < 1e-4);
    }
}

TEST_CASE("the negative control fails and unknown blocks are rejected") {
    const auto r = grad_check(kNegativeControlBlock);
    CHECK_FALSE(r.passed);
    CHECK(r.max_rel_error > 1e-2);
    CHECK_THROWS_AS((void)grad_check("nope"), ConfigError);
    CHECK(gradcheck_blocks().size() == 7);
}

// --- training ----------------------------------------------------------------

TEST_CASE("training profiles") {
    const auto standard = standard_train_profile();
    CHECK(standard.lr == 1e-5);
    CHECK(standard.epochs == 50);
    CHECK(standard.alpha == 0.7);
    const auto desk = desk_train_profile();
    CHECK(desk.lr == 1e-3);
    CHECK(desk.max_steps == 200);
    CHECK(parse_loss("l2") == LossKind::kL2);
    CHECK(loss_name(LossKind::kL1) == "l1");
    CHECK_THROWS_AS((void)parse_loss("huber"), ConfigError);
    TrainConfig bad = desk;
    bad.batch_size = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = desk;
    bad.alpha = 1.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("one epoch over two samples gives one finite record") {
    const auto ds = data::generate_dataset(tiny_data());
    std::vector<data::SamplePair> two(ds.train.begin(), ds.train.begin() + 2);
    TrainConfig cfg = desk_train_profile();
    cfg.max_steps = 0;
    cfg.epochs = 1;
    cfg.batch_size = 1;
    std::vector<EpochRecord> seen;
    const auto r = fit(tiny_model(), two, ds.val, cfg, [&](const EpochRecord& e) { seen.push_back(e); });
    REQUIRE(r.epochs.size() == 1);
    CHECK(seen.size() == 1);
    CHECK(std::isfinite(r.epochs[0].loss));
    CHECK(r.epochs[0].step == 2);
    CHECK(r.step_losses.size() == 2);
    CHECK(std::isfinite(r.epochs[0].val_psnr));
    CHECK(r.best_epoch == 1);
    const auto j = to_json(r.epochs[0]);
    CHECK(j["epoch"] == 1);
    CHECK(j.contains("val_ssim"));
}

TEST_CASE("max_steps caps updates across epochs") {
    const auto ds = data::generate_dataset(tiny_data());
    TrainConfig cfg = desk_train_profile();
    cfg.max_steps = 5;
    cfg.batch_size = 3;
    const auto r = fit(tiny_model("Ab1"), ds.train, {}, cfg);
    CHECK(r.step_losses.size() == 5);
    CHECK(r.epochs.size() == 2);  // 7 samples at batch 3 is 3 steps per epoch
    CHECK(r.epochs.back().step == 5);
    CHECK(std::isnan(r.epochs.back().val_psnr));
}

TEST_CASE("validation is isolated from training") {
    const auto a = data::generate_dataset(tiny_data(3));
    const auto b = data::generate_dataset(tiny_data(4));
    TrainConfig cfg = desk_train_profile();
    cfg.max_steps = 3;
    cfg.epochs = 1;
    cfg.batch_size = 7;
    const auto ra = fit(tiny_model(), a.train, a.val, cfg);
    const auto rb = fit(tiny_model(), a.train, b.val, cfg);
    CHECK(ra.step_losses == rb.step_losses);
    CHECK(ra.epochs.back().val_psnr != rb.epochs.back().val_psnr);
    for (const auto* r : {&ra, &rb}) {
        REQUIRE(r->best_epoch == r->epochs.size());
    }
    CHECK(ra.epochs.back().val_psnr == evaluate(ra.model, a.val).mean_psnr);
    CHECK(rb.epochs.back().val_ssim == evaluate(rb.model, b.val).mean_ssim);
}

TEST_CASE("training is deterministic for a fixed seed") {
    const auto ds = data::generate_dataset(tiny_data());
    TrainConfig cfg = desk_train_profile();
    cfg.max_steps = 6;
    cfg.batch_size = 2;
    const auto r1 = fit(tiny_model(), ds.train, ds.val, cfg);
    const auto r2 = fit(tiny_model(), ds.train, ds.val, cfg);
    CHECK(r1.step_losses == r2.step_losses);
    for (std::size_t i = 0; i < r1.model.params().size(); ++i) {
        CHECK(r1.model.params().entries()[i].var->value.vec() ==
              r2.model.params().entries()[i].var->value.vec());
    }
    cfg.seed = 1;
    CHECK(fit(tiny_model(), ds.train, ds.val, cfg).step_losses != r1.step_losses);
}

TEST_CASE("baselines and prediction") {
    const auto ds = data::generate_dataset(tiny_data());
    const auto id = evaluate_identity(ds.test);
    CHECK(std::isinf(id.mean_psnr));
    CHECK(id.mean_ssim == doctest::Approx(1.0));
    CHECK(id.mean_nmse == 0.0);
    const auto zf = evaluate_zero_fill(ds.test);
    CHECK(std::isfinite(zf.mean_psnr));
    CHECK(zf.samples.size() == ds.test.size());
    nn::SANet<float> m(tiny_model(), 0);
    const auto preds = predict(m, ds.test, 2);
    REQUIRE(preds.size() == ds.test.size());
    CHECK(preds[0].height == 16);
    CHECK(evaluate(m, ds.test, 1).mean_psnr == doctest::Approx(evaluate(m, ds.test, 3).mean_psnr).epsilon(1e-5));
}

// --- persistence -------------------------------------------------------------

TEST_CASE("checkpoints round-trip and detect mismatches") {
    test::TempDir dir("ckpt");
    nn::SANet<float> m(tiny_model(), 11);
    save_checkpoint(dir.path, m);
    const auto back = load_checkpoint(dir.path);
    CHECK(back.config() == m.config());
    REQUIRE(back.params().size() == m.params().size());
    for (std::size_t i = 0; i < m.params().size(); ++i) {
        CHECK(back.params().entries()[i].name == m.params().entries()[i].name);
        CHECK(back.params().entries()[i].var->value.vec() == m.params().entries()[i].var->value.vec());
    }

    auto cfg_json = nlohmann::json::parse(std::ifstream(dir.path / "model.json"));
    cfg_json["channels"] = 8;
    std::ofstream(dir.path / "model.json") << cfg_json.dump();
    CHECK_THROWS_AS((void)load_checkpoint(dir.path), ShapeError);

    cfg_json["channels"] = 4;
    cfg_json["extra"] = 1;
    std::ofstream(dir.path / "model.json") << cfg_json.dump();
    CHECK_THROWS_AS((void)load_checkpoint(dir.path), ConfigError);

    CHECK(model_config_from_json(model_config_to_json(m.config())) == m.config());
}

TEST_CASE("split loading does not depend on the worker count") {
    test::TempDir dir("loader");
    data::write_dataset(tiny_data(), dir.path);
    const auto one = load_split(dir.path, "train", 1);
    const auto many = load_split(dir.path, "train", 3);
    REQUIRE(one.size() == 7);
    REQUIRE(many.size() == 7);
    for (std::size_t i = 0; i < 7; ++i) {
        CHECK(one[i].id == many[i].id);
        CHECK(one[i].y_tar.data == many[i].y_tar.data);
    }
    CHECK(loader_threads() >= 1);
    CHECK_THROWS((void)load_split(dir.path, "nope", 1));
}

TEST_CASE("png export writes a valid header") {
    test::TempDir dir("png");
    Image img(5, 7, 0.5);
    img(0, 0) = 2.0;
    write_png(dir.path / "x.png", img);
    const auto bytes = test::read_bytes(dir.path / "x.png");
    REQUIRE(bytes.size() > 8);
    CHECK(bytes[1] == 'P');
    CHECK(bytes[2] == 'N');
    CHECK(bytes[3] == 'G');
}
