#include "msr/train/stats.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <string>

#include "msr/error.hpp"

namespace msr::train {

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw ShapeError("paired_t_test: lengths differ (" + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + ")");
    }
    const std::size_t n = a.size();
    if (n < 2) throw ConfigError("paired_t_test: need at least two pairs");

    TTestResult r;
    r.n = n;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += a[i] - b[i];
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    bool all_zero = true;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        all_zero = all_zero && d == 0.0;
        ss += (d - mean) * (d - mean);
    }
    r.mean_diff = mean;
    if (!std::isfinite(mean) || !std::isfinite(ss)) {
        throw ValueError("paired_t_test: non-finite scores");
    }
    if (all_zero) return r;
    if (ss == 0.0) {
        r.t = std::copysign(std::numeric_limits<double>::infinity(), mean);
        r.p = 0.0;
        r.degenerate = true;
        return r;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
    const boost::math::students_t dist(static_cast<double>(n - 1));
    r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
    return r;
}

}  // namespace msr::train
