#include "msr/train/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace msr::train {
namespace {

void require_same(const Image& a, const Image& b, const char* what) {
    if (a.height != b.height || a.width != b.width) {
        throw ShapeError(std::string(what) + ": image shapes differ (" + std::to_string(a.height) +
                         "x" + std::to_string(a.width) + " vs " + std::to_string(b.height) + "x" +
                         std::to_string(b.width) + ")");
    }
}

std::array<double, kSsimWindow> gaussian_window() {
    std::array<double, kSsimWindow> g{};
    constexpr double sigma = 1.5;
    const double mid = (kSsimWindow - 1) / 2.0;
    double total = 0.0;
    for (std::size_t i = 0; i < kSsimWindow; ++i) {
        const double d = static_cast<double>(i) - mid;
        g[i] = std::exp(-d * d / (2.0 * sigma * sigma));
        total += g[i];
    }
    for (auto& v : g) v /= total;
    return g;
}

// Separable Gaussian filter over valid positions.
Image filter_valid(const Image& x, const std::array<double, kSsimWindow>& g) {
    const std::size_t oh = x.height - kSsimWindow + 1;
    const std::size_t ow = x.width - kSsimWindow + 1;
    Image rows(x.height, ow);
    for (std::size_t r = 0; r < x.height; ++r) {
        for (std::size_t c = 0; c < ow; ++c) {
            double s = 0.0;
            for (std::size_t k = 0; k < kSsimWindow; ++k) s += g[k] * x(r, c + k);
            rows(r, c) = s;
        }
    }
    Image out(oh, ow);
    for (std::size_t r = 0; r < oh; ++r) {
        for (std::size_t c = 0; c < ow; ++c) {
            double s = 0.0;
            for (std::size_t k = 0; k < kSsimWindow; ++k) s += g[k] * rows(r + k, c);
            out(r, c) = s;
        }
    }
    return out;
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

double psnr(const Image& pred, const Image& gt, double max_val) {
    require_same(pred, gt, "psnr");
    if (!(max_val > 0.0)) throw ConfigError("psnr: max_val must be positive");
    if (gt.size() == 0) throw ShapeError("psnr: empty images");
    double sse = 0.0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        const double d = pred.data[i] - gt.data[i];
        sse += d * d;
    }
    const double mse = sse / static_cast<double>(gt.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(max_val * max_val / mse);
}

double ssim(const Image& pred, const Image& gt) {
    require_same(pred, gt, "ssim");
    if (pred.height < kSsimWindow || pred.width < kSsimWindow) {
        throw ConfigError("ssim: images must be at least 11x11");
    }
    constexpr double c1 = 0.01 * 0.01;
    constexpr double c2 = 0.03 * 0.03;
    const auto g = gaussian_window();

    Image aa(pred.height, pred.width);
    Image bb(pred.height, pred.width);
    Image ab(pred.height, pred.width);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        aa.data[i] = pred.data[i] * pred.data[i];
        bb.data[i] = gt.data[i] * gt.data[i];
        ab.data[i] = pred.data[i] * gt.data[i];
    }
    const Image mu_a = filter_valid(pred, g);
    const Image mu_b = filter_valid(gt, g);
    const Image e_aa = filter_valid(aa, g);
    const Image e_bb = filter_valid(bb, g);
    const Image e_ab = filter_valid(ab, g);

    double total = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double ma = mu_a.data[i];
        const double mb = mu_b.data[i];
        const double var_a = e_aa.data[i] - ma * ma;
        const double var_b = e_bb.data[i] - mb * mb;
        const double cov = e_ab.data[i] - ma * mb;
        total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
                 ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
    }
    return total / static_cast<double>(mu_a.size());
}

double nmse(const Image& pred, const Image& gt) {
    require_same(pred, gt, "nmse");
    double err = 0.0;
    double energy = 0.0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        const double d = pred.data[i] - gt.data[i];
        err += d * d;
        energy += gt.data[i] * gt.data[i];
    }
    if (energy == 0.0) throw ValueError("nmse: ground truth is all zero");
    return err / energy;
}

Image error_map(const Image& pred, const Image& gt, double saturation) {
    require_same(pred, gt, "error_map");
    if (!(saturation > 0.0)) throw ConfigError("error_map: saturation must be positive");
    Image out(gt.height, gt.width);
    for (std::size_t i = 0; i < gt.size(); ++i) {
        out.data[i] = std::clamp(std::abs(pred.data[i] - gt.data[i]) / saturation, 0.0, 1.0);
    }
    return out;
}

std::vector<double> MetricReport::psnr_values() const {
    std::vector<double> v;
    for (const auto& s : samples) v.push_back(s.psnr);
    return v;
}

std::vector<double> MetricReport::ssim_values() const {
    std::vector<double> v;
    for (const auto& s : samples) v.push_back(s.ssim);
    return v;
}

SampleMetrics measure(const std::string& id, const Image& pred, const Image& gt) {
    return {id, psnr(pred, gt), ssim(pred, gt), nmse(pred, gt)};
}

void summarize(MetricReport& report) {
    std::vector<double> p;
    std::vector<double> s;
    std::vector<double> n;
    for (const auto& m : report.samples) {
        p.push_back(m.psnr);
        s.push_back(m.ssim);
        n.push_back(m.nmse);
    }
    report.mean_psnr = mean_of(p);
    report.mean_ssim = mean_of(s);
    report.mean_nmse = mean_of(n);
}

}  // namespace msr::train
