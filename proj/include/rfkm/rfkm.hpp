#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "rfkm/clustering.hpp"
#include "rfkm/dataset.hpp"
#include "rfkm/rng.hpp"

namespace rfkm {

// Hyper-parameters of the representativity-fair objective and its solver.
struct RfkmParams {
    double lambda1 = 1.0;             // weight of the squared-loss term
    std::optional<double> lambda2;    // weight of the smoothed-max term; nullopt = n/10
    double phi = 3.0;                 // sharpness of the smoothed max
    int max_outer_iters = 100;
    int max_rep_fixed_point_iters = 20;
    double rep_tol = 1e-6;            // representative movement threshold
    double objective_tol = 1e-6;      // relative total-objective change threshold
    RngSeed seed;
    bool check_edit_terms = false;    // debug: compare incremental edit terms to scratch

    double resolved_lambda2(std::size_t n) const {
        return lambda2 ? *lambda2 : static_cast<double>(n) / 10.0;
    }
    void validate() const;  // throws std::invalid_argument
};

struct ObjectiveBreakdown {
    double term1 = 0.0;  // sum of squared distances
    double term2 = 0.0;  // sum of squared distances, squared
    double term3 = 0.0;  // smoothed max of the squared distances
    double total = 0.0;  // term1 + lambda1*term2 + lambda2*term3
};

// (1/phi) * log sum_i exp(phi * v_i), evaluated against the max exponent so
// it never overflows. Upper-bounds max(v) by at most log(n)/phi.
double smooth_max(std::span<const double> values, double phi);

// Exact evaluation of the three objective terms for a given clustering.
ObjectiveBreakdown objective(const Dataset& d, const Clustering& c, const RfkmParams& p);

// log sum_i exp(phi * d_i) over every object's squared distance to its
// representative: the shared normalizer of the representative update.
double log_exp_denominator(const Dataset& d, const Clustering& c, double phi);

// Per-member weights 1 + 2*lambda1*d + lambda2*exp(phi*d - log_denominator)
// for the given cluster at its current representative, ordered by ascending
// object index. The representative update is the weight-weighted mean.
std::vector<double> representative_weights(const Dataset& d, const Clustering& c,
                                           std::size_t cluster_index, const RfkmParams& p,
                                           double log_denominator);

// Refinement of one cluster's representative: repeatedly step toward the
// weighted mean, with weights recomputed at each iterate — the members'
// share of the smoothed-max normalizer tracks the moving representative,
// the other clusters' share stays put (their distances don't involve it).
// Each step backtracks (t = 1, 1/2, 1/4, 1/8 of the way) until it lowers
// the cluster's share of the exact objective and stops when no fraction
// does, so an update never worsens the objective. Runs until movement
// drops below rep_tol or max_rep_fixed_point_iters steps were taken.
std::vector<double> update_representative(const Dataset& d, const Clustering& c,
                                          std::size_t cluster_index, const RfkmParams& p);

struct SweepStats {
    std::size_t changed = 0;
    std::size_t pinned = 0;             // objects kept in place as sole cluster members
    double max_edit_check_error = 0.0;  // only meaningful with check_edit_terms
};

// One pass over the objects in index order with representatives fixed. Each
// object moves to the cluster minimizing squared distance + lambda1 * its
// square + lambda2 * the smoothed max re-evaluated under that single move;
// the smoothed-max bookkeeping is updated in O(1) per candidate. Moves that
// would empty a cluster are skipped. Each move commits before the next
// object is examined.
std::pair<Clustering, SweepStats> assignment_step(const Dataset& d, const Clustering& c,
                                                  const RfkmParams& p);

struct RfkmResult {
    Clustering clustering;
    ObjectiveBreakdown objective;
    int iterations = 0;
    std::vector<double> objective_history;   // total after each outer iteration
    std::size_t singleton_pins = 0;          // guard events summed over all sweeps
    double max_edit_check_error = 0.0;       // only meaningful with check_edit_terms
};

// Full optimizer: random initialization shared with the K-Means baseline,
// representative refinement, then alternating assignment sweeps and
// representative updates until a sweep changes nothing while every
// representative moved at most rep_tol, the relative objective change
// falls below objective_tol, or max_outer_iters is hit.
RfkmResult rfkm_fit(const Dataset& d, std::size_t k, const RfkmParams& p);

}  // namespace rfkm
