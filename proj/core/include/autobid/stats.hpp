#pragma once

#include <span>
#include <vector>

namespace autobid::stats {

double mean(std::span<const double> xs);

/// Linearly interpolated percentile on already sorted data, p in [0, 100].
/// Position (n - 1) * p / 100 between order statistics; 0 for empty input.
double percentile_sorted(std::span<const double> sorted, double p);

/// Same as percentile_sorted on a sorted copy.
double percentile(std::span<const double> xs, double p);

std::vector<double> sorted_copy(std::span<const double> xs);

}  // namespace autobid::stats
