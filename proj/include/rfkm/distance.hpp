#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

namespace rfkm {

// Sum of squared per-attribute differences. This is the dissimilarity the
// optimizer works with; see euclidean_distance for the reporting metric.
inline double squared_distance(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw std::invalid_argument("squared_distance: dimension mismatch (" +
                                    std::to_string(x.size()) + " vs " + std::to_string(y.size()) + ")");
    double acc = 0.0;
    for (std::size_t a = 0; a < x.size(); ++a) {
        const double diff = x[a] - y[a];
        acc += diff * diff;
    }
    return acc;
}

inline double euclidean_distance(std::span<const double> x, std::span<const double> y) {
    return std::sqrt(squared_distance(x, y));
}

}  // namespace rfkm
