#pragma once

#include <span>
#include <vector>

namespace liqmode {

// Percentile p in [0, 100] by linear interpolation between order statistics
// (position (n - 1) * p / 100). `sorted` must be ascending and non-empty.
double percentile_sorted(std::span<const double> sorted, double p);

// Same, sorting a copy first.
double percentile(std::span<const double> values, double p);

// 75th minus 25th percentile.
double interquartile_range(std::span<const double> values);

double mean(std::span<const double> values);

// Sample standard deviation (n - 1 denominator); 0 when n < 2.
double sample_stddev(std::span<const double> values);

}  // namespace liqmode
