#include "rfkm/kmeans.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "rfkm/distance.hpp"

namespace rfkm {

namespace {

void check_k(const Dataset& d, std::size_t k) {
    if (k < 1 || k > d.rows)
        throw std::invalid_argument("k must be in [1, n]; got k=" + std::to_string(k) +
                                    " for n=" + std::to_string(d.rows));
}

double total_objective(const Dataset& d, const Clustering& c) {
    double acc = 0.0;
    for (std::size_t i = 0; i < d.rows; ++i)
        acc += squared_distance(d.row(i), c.representative(static_cast<std::size_t>(c.assignment[i])));
    return acc;
}

}  // namespace

std::vector<double> compute_centroids(const Dataset& d, const std::vector<int>& assignment,
                                      std::size_t k) {
    std::vector<double> centroids(k * d.cols, 0.0);
    std::vector<double> counts(k, 0.0);
    for (std::size_t i = 0; i < d.rows; ++i) {
        const auto c = static_cast<std::size_t>(assignment[i]);
        counts[c] += 1.0;
        const auto x = d.row(i);
        for (std::size_t a = 0; a < d.cols; ++a) centroids[c * d.cols + a] += x[a];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0.0)
            throw std::invalid_argument("compute_centroids: cluster " + std::to_string(c) +
                                        " is empty");
        for (std::size_t a = 0; a < d.cols; ++a) centroids[c * d.cols + a] /= counts[c];
    }
    return centroids;
}

Clustering init_random(const Dataset& d, std::size_t k, RngSeed seed) {
    check_k(d, k);
    SplitMix64 rng(seed);

    Clustering c;
    c.k = k;
    c.cols = d.cols;
    c.assignment.resize(d.rows);
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < d.rows; ++i) {
        const auto a = static_cast<int>(rng.below(k));
        c.assignment[i] = a;
        ++sizes[static_cast<std::size_t>(a)];
    }

    // Empty clusters steal one uniformly chosen object from those living in
    // clusters of size >= 2. Terminates because n >= k.
    for (std::size_t empty = 0; empty < k; ++empty) {
        if (sizes[empty] != 0) continue;
        std::vector<std::size_t> donors;
        for (std::size_t i = 0; i < d.rows; ++i)
            if (sizes[static_cast<std::size_t>(c.assignment[i])] >= 2) donors.push_back(i);
        const std::size_t pick = donors[rng.below(donors.size())];
        --sizes[static_cast<std::size_t>(c.assignment[pick])];
        c.assignment[pick] = static_cast<int>(empty);
        sizes[empty] = 1;
    }

    c.representatives = compute_centroids(d, c.assignment, k);
    return c;
}

KMeansResult kmeans_fit_from(const Dataset& d, Clustering initial, int max_iters, double tol) {
    check_consistent(d, initial);
    if (max_iters < 1) throw std::invalid_argument("kmeans: max_iters must be >= 1");
    if (tol < 0.0) throw std::invalid_argument("kmeans: tol must be >= 0");

    KMeansResult result;
    result.clustering = std::move(initial);
    Clustering& c = result.clustering;
    const std::size_t k = c.k;
    double prev_objective = std::numeric_limits<double>::quiet_NaN();

    for (int iter = 0; iter < max_iters; ++iter) {
        // Assignment: nearest representative by squared distance.
        std::size_t changed = 0;
        std::vector<std::size_t> sizes(k, 0);
        for (std::size_t i = 0; i < d.rows; ++i) {
            const auto x = d.row(i);
            int best = 0;
            double best_dist = squared_distance(x, c.representative(0));
            for (std::size_t j = 1; j < k; ++j) {
                const double dist = squared_distance(x, c.representative(j));
                if (dist < best_dist) {
                    best_dist = dist;
                    best = static_cast<int>(j);
                }
            }
            if (best != c.assignment[i]) ++changed;
            c.assignment[i] = best;
            ++sizes[static_cast<std::size_t>(best)];
        }

        // An emptied cluster takes the globally farthest object as its sole
        // member; farthest measured against the current representatives.
        for (std::size_t empty = 0; empty < k; ++empty) {
            if (sizes[empty] != 0) continue;
            std::size_t farthest = d.rows;
            double far_dist = -1.0;
            for (std::size_t i = 0; i < d.rows; ++i) {
                const auto own = static_cast<std::size_t>(c.assignment[i]);
                if (sizes[own] < 2) continue;
                const double dist = squared_distance(d.row(i), c.representative(own));
                if (dist > far_dist) {
                    far_dist = dist;
                    farthest = i;
                }
            }
            --sizes[static_cast<std::size_t>(c.assignment[farthest])];
            c.assignment[farthest] = static_cast<int>(empty);
            sizes[empty] = 1;
            ++changed;
            ++result.repairs;
        }

        c.representatives = compute_centroids(d, c.assignment, k);
        const double objective = total_objective(d, c);
        result.objective_history.push_back(objective);
        result.iterations = iter + 1;
        result.objective = objective;

        if (changed == 0) break;
        // With tol == 0 only assignment stability can stop the loop: the
        // objective never increases, so the decrease is never below zero.
        if (iter > 0 && prev_objective - objective < tol * std::max(std::abs(prev_objective), 1e-300))
            break;
        prev_objective = objective;
    }
    return result;
}

KMeansResult kmeans_fit(const Dataset& d, std::size_t k, RngSeed seed, int max_iters, double tol) {
    return kmeans_fit_from(d, init_random(d, k, seed), max_iters, tol);
}

}  // namespace rfkm
