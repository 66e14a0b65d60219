#include "msr/train/fit.hpp"

#include <cmath>
#include <numeric>

#include "msr/data/phantom.hpp"
#include "msr/train/adam.hpp"
#include "msr/train/loss.hpp"

namespace msr::train {
namespace {

using nn::Var;

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    nn::Rng rng(data::mix_seed(seed, 0x5348554646ULL + epoch));
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    return order;
}

fourier::Image to_image(const Tensor<float>& t, std::size_t item) {
    const Shape& s = t.shape();
    fourier::Image img(s.h, s.w);
    const float* p = t.data() + item * s.item();
    for (std::size_t i = 0; i < img.size(); ++i) img.data[i] = p[i];
    return img;
}

}  // namespace

Tensor<float> stack_images(const std::vector<const fourier::Image*>& images) {
    if (images.empty()) throw ShapeError("stack_images: empty batch");
    const std::size_t h = images.front()->height;
    const std::size_t w = images.front()->width;
    Tensor<float> t(Shape{images.size(), 1, h, w});
    for (std::size_t n = 0; n < images.size(); ++n) {
        const auto& img = *images[n];
        if (img.height != h || img.width != w) throw ShapeError("stack_images: ragged batch");
        for (std::size_t i = 0; i < img.size(); ++i) t[n * h * w + i] = static_cast<float>(img.data[i]);
    }
    return t;
}

Batch make_batch(const std::vector<data::SamplePair>& samples,
                 const std::vector<std::size_t>& indices, bool with_aux) {
    std::vector<const fourier::Image*> aux;
    std::vector<const fourier::Image*> tar;
    std::vector<const fourier::Image*> lr;
    for (std::size_t i : indices) {
        aux.push_back(&samples.at(i).x_aux);
        tar.push_back(&samples.at(i).x_tar);
        lr.push_back(&samples.at(i).y_tar);
    }
    Batch b;
    if (with_aux) b.x_aux = nn::constant(stack_images(aux));
    b.x_tar = nn::constant(stack_images(tar));
    b.y_tar = nn::constant(stack_images(lr));
    return b;
}

nlohmann::ordered_json json_number(double v) {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

nlohmann::ordered_json to_json(const EpochRecord& r) {
    return {{"epoch", r.epoch},
            {"step", r.step},
            {"loss", json_number(r.loss)},
            {"val_psnr", json_number(r.val_psnr)},
            {"val_ssim", json_number(r.val_ssim)}};
}

nlohmann::ordered_json to_json(const MetricReport& report) {
    nlohmann::ordered_json samples = nlohmann::ordered_json::array();
    for (const auto& s : report.samples) {
        samples.push_back({{"id", s.id},
                           {"psnr", json_number(s.psnr)},
                           {"ssim", json_number(s.ssim)},
                           {"nmse", json_number(s.nmse)}});
    }
    return {{"samples", samples},
            {"aggregate",
             {{"count", report.samples.size()},
              {"psnr", json_number(report.mean_psnr)},
              {"ssim", json_number(report.mean_ssim)},
              {"nmse", json_number(report.mean_nmse)}}}};
}

std::vector<fourier::Image> predict(const nn::SANet<float>& model,
                                    const std::vector<data::SamplePair>& samples,
                                    std::size_t batch_size) {
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    nn::NoGradGuard no_grad;
    std::vector<fourier::Image> out;
    out.reserve(samples.size());
    for (std::size_t start = 0; start < samples.size(); start += batch_size) {
        std::vector<std::size_t> idx;
        for (std::size_t i = start; i < std::min(samples.size(), start + batch_size); ++i) idx.push_back(i);
        const Batch b = make_batch(samples, idx, model.config().use_aux);
        const auto fwd = model.forward(b.x_aux, b.y_tar);
        for (std::size_t n = 0; n < idx.size(); ++n) out.push_back(to_image(fwd.sr_tar->value, n));
    }
    return out;
}

MetricReport evaluate(const nn::SANet<float>& model, const std::vector<data::SamplePair>& samples,
                      std::size_t batch_size) {
    const auto preds = predict(model, samples, batch_size);
    MetricReport r;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        r.samples.push_back(measure(samples[i].id, preds[i], samples[i].x_tar));
    }
    summarize(r);
    return r;
}

MetricReport evaluate_zero_fill(const std::vector<data::SamplePair>& samples) {
    MetricReport r;
    for (const auto& s : samples) {
        const auto up = fourier::zero_fill_upsample(s.y_tar, fourier::ScaleFactor(static_cast<int>(s.scale)));
        r.samples.push_back(measure(s.id, up, s.x_tar));
    }
    summarize(r);
    return r;
}

MetricReport evaluate_identity(const std::vector<data::SamplePair>& samples) {
    MetricReport r;
    for (const auto& s : samples) r.samples.push_back(measure(s.id, s.x_tar, s.x_tar));
    summarize(r);
    return r;
}

FitResult fit(const nn::ModelConfig& model_cfg, const std::vector<data::SamplePair>& train,
              const std::vector<data::SamplePair>& val, const TrainConfig& cfg,
              const EpochCallback& on_epoch) {
    cfg.validate();
    model_cfg.validate();
    if (train.empty()) throw ConfigError("training split is empty");
    for (const auto& s : train) {
        if (s.scale != model_cfg.scale) {
            throw ConfigError("sample " + s.id + " has scale " + std::to_string(s.scale) +
                              " but the model expects " + std::to_string(model_cfg.scale));
        }
    }

    nn::SANet<float> model(model_cfg, cfg.seed);
    Adam<float> adam(cfg.adam());
    const bool with_aux = model_cfg.use_aux;
    const std::size_t per_epoch = (train.size() + cfg.batch_size - 1) / cfg.batch_size;
    const std::size_t total_steps = cfg.max_steps > 0 ? cfg.max_steps : cfg.epochs * per_epoch;

    FitResult result{std::move(model), {}, {}, 0};
    auto& net = result.model;
    std::vector<Tensor<float>> best;
    double best_psnr = -std::numeric_limits<double>::infinity();
    std::size_t step = 0;

    for (std::size_t epoch = 1; step < total_steps; ++epoch) {
        const auto order = epoch_order(train.size(), cfg.seed, epoch);
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size() && step < total_steps; start += cfg.batch_size) {
            const std::vector<std::size_t> idx(
                order.begin() + static_cast<std::ptrdiff_t>(start),
                order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), start + cfg.batch_size)));
            const Batch b = make_batch(train, idx, with_aux);
            net.params().zero_grads();
            const auto fwd = net.forward(b.x_aux, b.y_tar);
            const auto loss = joint_loss(fwd.sr_tar, b.x_tar, fwd.sr_aux, b.x_aux, cfg.alpha, cfg.loss);
            const double lv = loss->value[0];
            if (!std::isfinite(lv)) {
                throw NumericError("non-finite loss at step " + std::to_string(step + 1));
            }
            nn::backward(loss);
            adam.step(net.params(), ++step);
            result.step_losses.push_back(lv);
            loss_sum += lv;
            ++batches;
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.step = step;
        rec.loss = loss_sum / static_cast<double>(batches);
        bool improved = val.empty();
        if (!val.empty()) {
            const MetricReport r = evaluate(net, val, cfg.batch_size);
            rec.val_psnr = r.mean_psnr;
            rec.val_ssim = r.mean_ssim;
            improved = best.empty() || rec.val_psnr > best_psnr;
        }
        if (improved) {
            best_psnr = rec.val_psnr;
            result.best_epoch = epoch;
            best.clear();
            for (const auto& e : net.params().entries()) best.push_back(e.var->value);
        }
        result.epochs.push_back(rec);
        if (on_epoch) on_epoch(rec);
    }

    const auto& entries = net.params().entries();
    for (std::size_t k = 0; k < entries.size(); ++k) entries[k].var->value = best[k];
    return result;
}

}  // namespace msr::train
