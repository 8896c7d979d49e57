#pragma once

#include <vector>

#include "rfkm/clustering.hpp"
#include "rfkm/dataset.hpp"
#include "rfkm/rng.hpp"

namespace rfkm {

struct KMeansResult {
    Clustering clustering;
    double objective = 0.0;  // sum of squared distances to assigned representatives
    int iterations = 0;
    std::vector<double> objective_history;  // objective after each Lloyd iteration
    int repairs = 0;                        // empty-cluster repairs performed
};

// Uniform random assignment of objects to k clusters, followed by repair of
// any empty cluster (it steals one uniformly chosen object from the clusters
// of size >= 2) and centroid representatives. Deterministic given the seed.
// Shared by the K-Means baseline and the fair variant so both start from the
// same configuration under the same seed.
Clustering init_random(const Dataset& d, std::size_t k, RngSeed seed);

// Lloyd iteration from a given starting clustering: assign each object to
// its nearest representative by squared distance (ties to the lowest cluster
// index), repair empty clusters by giving them the globally farthest object
// as sole member, recompute centroids. Stops when no assignment changes or
// the relative objective decrease falls below tol.
KMeansResult kmeans_fit_from(const Dataset& d, Clustering initial, int max_iters, double tol);

KMeansResult kmeans_fit(const Dataset& d, std::size_t k, RngSeed seed, int max_iters = 100,
                        double tol = 1e-6);

// Centroids of the given assignment; every cluster index in [0,k) must be
// non-empty.
std::vector<double> compute_centroids(const Dataset& d, const std::vector<int>& assignment,
                                      std::size_t k);

}  // namespace rfkm
