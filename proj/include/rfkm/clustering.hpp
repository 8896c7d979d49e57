#pragma once

#include <span>
#include <string>
#include <vector>

#include "rfkm/dataset.hpp"

namespace rfkm {

// A comprehensive partition of a dataset plus one representative vector per
// cluster. Immutable once handed out; fit routines build a fresh one.
struct Clustering {
    std::size_t k = 0;
    std::size_t cols = 0;
    std::vector<int> assignment;          // one cluster index in [0,k) per object
    std::vector<double> representatives;  // k x cols, row-major

    std::span<const double> representative(std::size_t c) const {
        return {representatives.data() + c * cols, cols};
    }
    std::span<double> representative_mut(std::size_t c) {
        return {representatives.data() + c * cols, cols};
    }
    std::vector<std::size_t> cluster_sizes() const;
};

// Throws std::invalid_argument unless `c` is a valid clustering of `d`:
// matching lengths and dimensions, indices in range, finite representatives.
void check_consistent(const Dataset& d, const Clustering& c);

// Interchange format: {"assignment": [...], "representatives": [[...], ...]}.
// Values round-trip exactly, so metrics recomputed from a saved clustering
// match the in-memory ones.
void save_clustering_json(const Clustering& c, const std::string& path);
Clustering load_clustering_json(const std::string& path);
std::string clustering_to_json(const Clustering& c);

}  // namespace rfkm
