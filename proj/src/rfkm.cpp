#include "rfkm/rfkm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rfkm/distance.hpp"
#include "rfkm/kmeans.hpp"
#include "rfkm/logsum.hpp"

namespace rfkm {

namespace {

// Absolute log-space error allowed to enter the running sum through one
// incremental subtraction. Removing a term leaves roughly eps * |S| / resid
// of error, where resid is the surviving mass fraction, so the tighter the
// cancellation the sooner a from-scratch rebuild is forced.
constexpr double kSubPrecisionTarget = 1e-11;

std::vector<std::size_t> cluster_members(const Clustering& c, std::size_t cluster_index) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < c.assignment.size(); ++i)
        if (static_cast<std::size_t>(c.assignment[i]) == cluster_index) members.push_back(i);
    return members;
}

std::vector<double> distances_to_own(const Dataset& d, const Clustering& c) {
    std::vector<double> dist(d.rows);
    for (std::size_t i = 0; i < d.rows; ++i)
        dist[i] = squared_distance(d.row(i),
                                   c.representative(static_cast<std::size_t>(c.assignment[i])));
    return dist;
}

double log_sum_exp_excluding(std::span<const double> exponents, std::size_t skip) {
    double hi = kNegInf;
    for (std::size_t i = 0; i < exponents.size(); ++i)
        if (i != skip && exponents[i] > hi) hi = exponents[i];
    if (hi == kNegInf) return kNegInf;
    double acc = 0.0;
    for (std::size_t i = 0; i < exponents.size(); ++i)
        if (i != skip) acc += std::exp(exponents[i] - hi);
    return hi + std::log(acc);
}

}  // namespace

void RfkmParams::validate() const {
    if (lambda1 < 0.0) throw std::invalid_argument("params: lambda1 must be >= 0");
    if (lambda2 && *lambda2 < 0.0) throw std::invalid_argument("params: lambda2 must be >= 0");
    if (!(phi > 0.0)) throw std::invalid_argument("params: phi must be > 0");
    if (max_outer_iters < 1) throw std::invalid_argument("params: max_outer_iters must be >= 1");
    if (max_rep_fixed_point_iters < 1)
        throw std::invalid_argument("params: max_rep_fixed_point_iters must be >= 1");
    if (rep_tol < 0.0) throw std::invalid_argument("params: rep_tol must be >= 0");
    if (objective_tol < 0.0) throw std::invalid_argument("params: objective_tol must be >= 0");
}

double smooth_max(std::span<const double> values, double phi) {
    if (values.empty()) throw std::invalid_argument("smooth_max: empty input");
    if (!(phi > 0.0)) throw std::invalid_argument("smooth_max: phi must be > 0");
    double hi = values[0];
    for (double v : values) hi = std::max(hi, v);
    double acc = 0.0;
    for (double v : values) acc += std::exp(phi * (v - hi));
    return hi + std::log(acc) / phi;
}

ObjectiveBreakdown objective(const Dataset& d, const Clustering& c, const RfkmParams& p) {
    check_consistent(d, c);
    p.validate();
    const std::vector<double> dist = distances_to_own(d, c);
    ObjectiveBreakdown b;
    for (double v : dist) {
        b.term1 += v;
        b.term2 += v * v;
    }
    b.term3 = smooth_max(dist, p.phi);
    b.total = b.term1 + p.lambda1 * b.term2 + p.resolved_lambda2(d.rows) * b.term3;
    return b;
}

double log_exp_denominator(const Dataset& d, const Clustering& c, double phi) {
    check_consistent(d, c);
    if (!(phi > 0.0)) throw std::invalid_argument("log_exp_denominator: phi must be > 0");
    std::vector<double> exponents = distances_to_own(d, c);
    for (double& e : exponents) e *= phi;
    return log_sum_exp(exponents);
}

std::vector<double> representative_weights(const Dataset& d, const Clustering& c,
                                           std::size_t cluster_index, const RfkmParams& p,
                                           double log_denominator) {
    check_consistent(d, c);
    p.validate();
    const auto members = cluster_members(c, cluster_index);
    if (members.empty())
        throw std::invalid_argument("representative_weights: cluster " +
                                    std::to_string(cluster_index) + " is empty");
    const double lambda2 = p.resolved_lambda2(d.rows);
    const auto rep = c.representative(cluster_index);
    std::vector<double> weights;
    weights.reserve(members.size());
    for (std::size_t i : members) {
        const double dist = squared_distance(d.row(i), rep);
        double w = 1.0 + 2.0 * p.lambda1 * dist;
        if (lambda2 > 0.0)
            w += lambda2 * std::exp(std::min(p.phi * dist - log_denominator, 700.0));
        weights.push_back(w);
    }
    return weights;
}

std::vector<double> update_representative(const Dataset& d, const Clustering& c,
                                          std::size_t cluster_index, const RfkmParams& p) {
    check_consistent(d, c);
    p.validate();
    const auto members = cluster_members(c, cluster_index);
    if (members.empty())
        throw std::invalid_argument("update_representative: cluster " +
                                    std::to_string(cluster_index) + " is empty");
    const double lambda2 = p.resolved_lambda2(d.rows);
    const std::size_t m = d.cols;

    if (p.lambda1 == 0.0 && lambda2 == 0.0) {
        // All weights are 1: the minimizer is the plain member mean,
        // accumulated exactly like the baseline's centroid.
        std::vector<double> mean(m, 0.0);
        for (std::size_t i : members) {
            const auto x = d.row(i);
            for (std::size_t a = 0; a < m; ++a) mean[a] += x[a];
        }
        for (double& v : mean) v /= static_cast<double>(members.size());
        return mean;
    }

    // The other clusters' share of the smoothed-max normalizer; constant
    // throughout because none of their distances involve this representative.
    double log_others = kNegInf;
    if (lambda2 > 0.0) {
        std::vector<double> exponents;
        exponents.reserve(d.rows - members.size());
        for (std::size_t l = 0; l < d.rows; ++l) {
            const auto cl = static_cast<std::size_t>(c.assignment[l]);
            if (cl != cluster_index)
                exponents.push_back(p.phi * squared_distance(d.row(l), c.representative(cl)));
        }
        if (!exponents.empty()) log_others = log_sum_exp(exponents);
    }

    const auto start = c.representative(cluster_index);
    std::vector<double> rep(start.begin(), start.end());
    std::vector<double> dist(members.size());
    std::vector<double> exponents(members.size());
    std::vector<double> cand(m), cand_dist(members.size()), cand_exponents(members.size());

    // This cluster's share of the exact objective at r; fills the given
    // distance/exponent scratch and reports the refreshed normalizer.
    const auto score_at = [&](const std::vector<double>& r, std::vector<double>& dist_out,
                              std::vector<double>& exp_out, double& log_denom_out) {
        double score = 0.0;
        for (std::size_t j = 0; j < members.size(); ++j) {
            dist_out[j] = squared_distance(d.row(members[j]), r);
            score += dist_out[j] + p.lambda1 * dist_out[j] * dist_out[j];
        }
        log_denom_out = 0.0;
        if (lambda2 > 0.0) {
            for (std::size_t j = 0; j < members.size(); ++j) exp_out[j] = p.phi * dist_out[j];
            log_denom_out = log_add_exp(log_others, log_sum_exp(exp_out));
            score += lambda2 * log_denom_out / p.phi;
        }
        return score;
    };

    double log_denom = 0.0;
    double score = score_at(rep, dist, exponents, log_denom);
    std::vector<double> target(m);

    for (int iter = 0; iter < p.max_rep_fixed_point_iters; ++iter) {
        // Full step: the weighted mean at the current iterate. Member
        // exponents never exceed the refreshed normalizer, so every weight
        // is bounded by 1 + 2*lambda1*d + lambda2, and the displacement is
        // the cluster objective's gradient scaled by -1/(2*sum of weights)
        // — a descent direction whenever the gradient is nonzero.
        std::fill(target.begin(), target.end(), 0.0);
        double denom = 0.0;
        for (std::size_t j = 0; j < members.size(); ++j) {
            const auto x = d.row(members[j]);
            double w = 1.0 + 2.0 * p.lambda1 * dist[j];
            if (lambda2 > 0.0)
                w += lambda2 * std::exp(std::min(exponents[j] - log_denom, 0.0));
            denom += w;
            for (std::size_t a = 0; a < m; ++a) target[a] += w * x[a];
        }
        for (std::size_t a = 0; a < m; ++a) target[a] /= denom;

        // Backtrack toward the current iterate until the step improves the
        // score; accepting only improvements keeps the whole update from
        // ever worsening the exact objective, starting point included.
        double accepted_move = -1.0;
        for (double t = 1.0; t >= 0.125; t *= 0.5) {
            double move_sq = 0.0;
            for (std::size_t a = 0; a < m; ++a) {
                cand[a] = rep[a] + t * (target[a] - rep[a]);
                const double delta = cand[a] - rep[a];
                move_sq += delta * delta;
            }
            double cand_log_denom = 0.0;
            const double cand_score = score_at(cand, cand_dist, cand_exponents, cand_log_denom);
            if (cand_score < score) {
                rep.swap(cand);
                dist.swap(cand_dist);
                exponents.swap(cand_exponents);
                log_denom = cand_log_denom;
                score = cand_score;
                accepted_move = std::sqrt(move_sq);
                break;
            }
        }
        if (accepted_move < 0.0) break;  // stationary up to rounding
        if (accepted_move <= p.rep_tol) break;
    }
    return rep;
}

namespace {

struct SweepContext {
    const Dataset& d;
    const RfkmParams& p;
    double lambda2;
    std::vector<double> dist_to_own;  // squared distance to each object's representative
    std::vector<std::size_t> sizes;
    double log_sum = kNegInf;  // log sum_i exp(phi * dist_to_own[i]); unused if lambda2 == 0
};

// From-scratch surrogate for "object i moved to cluster target": recomputes
// every distance from the features, independent of the cached bookkeeping.
double edit_term_scratch(const SweepContext& ctx, const Clustering& c, std::size_t i,
                         std::size_t target) {
    std::vector<double> exponents(ctx.d.rows);
    for (std::size_t l = 0; l < ctx.d.rows; ++l) {
        const std::size_t cl = l == i ? target : static_cast<std::size_t>(c.assignment[l]);
        exponents[l] = ctx.p.phi * squared_distance(ctx.d.row(l), c.representative(cl));
    }
    return log_sum_exp(exponents);
}

SweepStats sweep_inplace(SweepContext& ctx, Clustering& c) {
    SweepStats stats;
    const std::size_t k = c.k;
    const double phi = ctx.p.phi;

    for (std::size_t i = 0; i < ctx.d.rows; ++i) {
        const auto own = static_cast<std::size_t>(c.assignment[i]);
        if (ctx.sizes[own] <= 1) {  // moving out would empty the cluster
            ++stats.pinned;
            continue;
        }

        const auto x = ctx.d.row(i);
        const double old_exponent = phi * ctx.dist_to_own[i];

        // Sum with this object's current contribution removed, rebuilt from
        // scratch when the subtraction would cancel almost everything.
        double log_sum_minus = kNegInf;
        if (ctx.lambda2 > 0.0) {
            const double resid = residual_fraction(ctx.log_sum, old_exponent);
            const double noise = std::numeric_limits<double>::epsilon() *
                                 std::max(std::abs(ctx.log_sum), 1.0);
            if (!(resid * kSubPrecisionTarget > noise)) {
                std::vector<double> exponents(ctx.d.rows);
                for (std::size_t l = 0; l < ctx.d.rows; ++l) exponents[l] = phi * ctx.dist_to_own[l];
                log_sum_minus = log_sum_exp_excluding(exponents, i);
            } else {
                log_sum_minus = log_sub_exp(ctx.log_sum, old_exponent);
            }
        }

        int best = -1;
        double best_score = std::numeric_limits<double>::infinity();
        double best_dist = 0.0;
        double best_log_sum = kNegInf;
        for (std::size_t j = 0; j < k; ++j) {
            const double dist = squared_distance(x, c.representative(j));
            double score = dist + ctx.p.lambda1 * dist * dist;
            double log_sum_after = kNegInf;
            if (ctx.lambda2 > 0.0) {
                log_sum_after = j == own ? ctx.log_sum : log_add_exp(log_sum_minus, phi * dist);
                score += ctx.lambda2 * log_sum_after / phi;
                if (ctx.p.check_edit_terms) {
                    const double scratch = edit_term_scratch(ctx, c, i, j);
                    const double err = std::abs(log_sum_after - scratch) /
                                       std::max(std::abs(scratch), 1e-12);
                    stats.max_edit_check_error = std::max(stats.max_edit_check_error, err);
                }
            }
            if (score < best_score) {
                best_score = score;
                best = static_cast<int>(j);
                best_dist = dist;
                best_log_sum = log_sum_after;
            }
        }

        if (static_cast<std::size_t>(best) != own) {
            c.assignment[i] = best;
            --ctx.sizes[own];
            ++ctx.sizes[static_cast<std::size_t>(best)];
            ctx.dist_to_own[i] = best_dist;
            if (ctx.lambda2 > 0.0) ctx.log_sum = best_log_sum;
            ++stats.changed;
        }
    }
    return stats;
}

SweepContext make_sweep_context(const Dataset& d, const Clustering& c, const RfkmParams& p) {
    SweepContext ctx{d, p, p.resolved_lambda2(d.rows), distances_to_own(d, c),
                     c.cluster_sizes(), kNegInf};
    for (std::size_t j = 0; j < c.k; ++j)
        if (ctx.sizes[j] == 0)
            throw std::invalid_argument("assignment_step: cluster " + std::to_string(j) +
                                        " is empty");
    if (ctx.lambda2 > 0.0) {
        std::vector<double> exponents = ctx.dist_to_own;
        for (double& e : exponents) e *= p.phi;
        ctx.log_sum = log_sum_exp(exponents);
    }
    return ctx;
}

}  // namespace

std::pair<Clustering, SweepStats> assignment_step(const Dataset& d, const Clustering& c,
                                                  const RfkmParams& p) {
    check_consistent(d, c);
    p.validate();
    Clustering updated = c;
    SweepContext ctx = make_sweep_context(d, updated, p);
    SweepStats stats = sweep_inplace(ctx, updated);
    return {std::move(updated), stats};
}

RfkmResult rfkm_fit(const Dataset& d, std::size_t k, const RfkmParams& p) {
    p.validate();
    RfkmResult result;
    result.clustering = init_random(d, k, p.seed);
    Clustering& c = result.clustering;

    auto update_all_representatives = [&]() -> double {
        double max_move = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            const std::vector<double> rep = update_representative(d, c, j, p);
            const auto current = c.representative(j);
            double move_sq = 0.0;
            for (std::size_t a = 0; a < d.cols; ++a) {
                const double delta = rep[a] - current[a];
                move_sq += delta * delta;
            }
            max_move = std::max(max_move, std::sqrt(move_sq));
            std::copy(rep.begin(), rep.end(), c.representative_mut(j).begin());
        }
        return max_move;
    };

    update_all_representatives();
    double prev_total = objective(d, c, p).total;
    result.objective_history.push_back(prev_total);

    for (int iter = 1; iter <= p.max_outer_iters; ++iter) {
        SweepContext ctx = make_sweep_context(d, c, p);
        const SweepStats stats = sweep_inplace(ctx, c);
        result.max_edit_check_error =
            std::max(result.max_edit_check_error, stats.max_edit_check_error);
        result.singleton_pins += stats.pinned;

        const double rep_move = update_all_representatives();

        const double total = objective(d, c, p).total;
        result.objective_history.push_back(total);
        result.iterations = iter;

        if (stats.changed == 0 && rep_move <= p.rep_tol) break;
        if (std::abs(total - prev_total) < p.objective_tol * std::max(std::abs(prev_total), 1e-300))
            break;
        prev_total = total;
    }

    result.objective = objective(d, c, p);
    return result;
}

}  // namespace rfkm
