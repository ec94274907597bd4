#include "liqmode/stats.hpp"

#include "liqmode/errors.hpp"

#include <algorithm>
#include <cmath>

namespace liqmode {

double percentile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) {
        throw ValidationError("percentile of an empty sample");
    }
    if (!(p >= 0.0 && p <= 100.0)) {
        throw ValidationError("percentile rank must lie in [0, 100]");
    }
    const double pos = static_cast<double>(sorted.size() - 1) * p / 100.0;
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double percentile(std::span<const double> values, double p) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    return percentile_sorted(sorted, p);
}

double interquartile_range(std::span<const double> values) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    return percentile_sorted(sorted, 75.0) - percentile_sorted(sorted, 25.0);
}

double mean(std::span<const double> values) {
    if (values.empty()) {
        return 0.0;
    }
    double s = 0.0;
    for (double v : values) {
        s += v;
    }
    return s / static_cast<double>(values.size());
}

double sample_stddev(std::span<const double> values) {
    if (values.size() < 2) {
        return 0.0;
    }
    const double m = mean(values);
    double ss = 0.0;
    for (double v : values) {
        ss += (v - m) * (v - m);
    }
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

}  // namespace liqmode
