#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "rfkm/clustering.hpp"
#include "rfkm/distance.hpp"
#include "rfkm/kmeans.hpp"
#include "rfkm/logsum.hpp"
#include "rfkm/rfkm.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace rfkm;
using testsupport::gaussian_blobs;
using testsupport::objective_naive;

namespace {

const Dataset kFive = make_dataset(5, 2, {1, 1, 1, 2, 2, 1, 3, 3, 5, 5});
const Clustering kFiveLone{2, 2, {0, 0, 0, 0, 1}, {1.75, 1.75, 5.0, 5.0}};
const Clustering kFivePaired{2, 2, {0, 0, 0, 1, 1}, {4.0 / 3.0, 4.0 / 3.0, 4.0, 4.0}};

RfkmParams toy_params() {
    RfkmParams p;
    p.lambda1 = 1.0;
    p.lambda2 = 0.5;
    p.phi = 3.0;
    return p;
}

}  // namespace

TEST_CASE("smooth_max basics") {
    CHECK(smooth_max(std::vector<double>{4.25}, 3.0) == 4.25);
    CHECK(smooth_max(std::vector<double>{0.0, 0.0}, 2.0) ==
          doctest::Approx(std::log(2.0) / 2.0).epsilon(1e-12));
    // shift-invariance: adding a constant shifts the result by it
    CHECK(smooth_max(std::vector<double>{1e8, 1e8}, 3.0) ==
          doctest::Approx(1e8 + std::log(2.0) / 3.0));
    CHECK_THROWS_AS((void)smooth_max(std::vector<double>{}, 3.0), std::invalid_argument);
    CHECK_THROWS_AS((void)smooth_max(std::vector<double>{1.0}, 0.0), std::invalid_argument);
}

TEST_CASE("smooth_max brackets the true max and tightens with phi") {
    SplitMix64 rng(2024);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 1 + rng.below(40);
        std::vector<double> v(n);
        for (auto& x : v) x = 200.0 * rng.uniform01() - 100.0;
        const double m = *std::max_element(v.begin(), v.end());
        const double phi = 0.5 + 9.5 * rng.uniform01();
        const double sm = smooth_max(v, phi);
        CHECK(sm >= m - 1e-9);
        CHECK(sm <= m + std::log(static_cast<double>(n)) / phi + 1e-9);
        CHECK(smooth_max(v, phi * 4.0) <= sm + 1e-12);
    }
}

TEST_CASE("objective matches the worked two-cluster example and an oracle") {
    const RfkmParams p = toy_params();
    const ObjectiveBreakdown lone = objective(kFive, kFiveLone, p);
    const ObjectiveBreakdown paired = objective(kFive, kFivePaired, p);
    CHECK(lone.total == doctest::Approx(18.8756).epsilon(1e-4));
    CHECK(paired.total == doctest::Approx(15.1181).epsilon(1e-4));
    CHECK(lone.total / paired.total == doctest::Approx(1.2485).epsilon(1e-3));
    CHECK(lone.total ==
          doctest::Approx(objective_naive(kFive, kFiveLone, 1.0, 0.5, 3.0)).epsilon(1e-12));
    CHECK(paired.total ==
          doctest::Approx(objective_naive(kFive, kFivePaired, 1.0, 0.5, 3.0)).epsilon(1e-12));
    CHECK(lone.total == doctest::Approx(lone.term1 + p.lambda1 * lone.term2 +
                                        0.5 * lone.term3));
}

TEST_CASE("objective reduces to the k-means objective when both weights vanish") {
    const Dataset d = gaussian_blobs(30, 3, 3, 1.0, 10);
    const Clustering c = init_random(d, 3, RngSeed{3});
    RfkmParams p;
    p.lambda1 = 0.0;
    p.lambda2 = 0.0;
    double expect = 0.0;
    for (std::size_t i = 0; i < d.rows; ++i)
        expect += squared_distance(d.row(i),
                                   c.representative(static_cast<std::size_t>(c.assignment[i])));
    CHECK(objective(d, c, p).total == expect);
}

TEST_CASE("log_exp_denominator equals the direct sum") {
    const double logd = log_exp_denominator(kFive, kFiveLone, 3.0);
    long double acc = 0.0L;
    const double dist[] = {1.125, 0.625, 0.625, 3.125, 0.0};
    for (double v : dist) acc += std::exp(3.0L * v);
    CHECK(logd == doctest::Approx(static_cast<double>(std::log(acc))).epsilon(1e-12));
}

TEST_CASE("representative weights") {
    const Dataset d = make_dataset(3, 2, {0, 0, 1, 0, 4, 0});
    const Clustering c{1, 2, {0, 0, 0}, {0.0, 0.0}};

    SUBCASE("no fairness terms: all ones, exactly") {
        RfkmParams p;
        p.lambda1 = 0.0;
        p.lambda2 = 0.0;
        const auto w = representative_weights(d, c, 0, p, log_exp_denominator(d, c, 3.0));
        CHECK(w == std::vector<double>{1.0, 1.0, 1.0});
    }
    SUBCASE("squared term only: 1 + 2*lambda1*d") {
        RfkmParams p;
        p.lambda1 = 2.0;
        p.lambda2 = 0.0;
        const auto w = representative_weights(d, c, 0, p, 0.0);
        CHECK(w[0] == doctest::Approx(1.0));
        CHECK(w[1] == doctest::Approx(5.0));
        CHECK(w[2] == doctest::Approx(65.0));
    }
    SUBCASE("sharp phi concentrates the exponential weight on the farthest member") {
        RfkmParams p;
        p.lambda1 = 0.0;
        p.lambda2 = 1.0;
        p.phi = 50.0;
        const auto w = representative_weights(d, c, 0, p, log_exp_denominator(d, c, 50.0));
        CHECK(w[0] == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(w[1] == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(w[2] == doctest::Approx(2.0).epsilon(1e-9));  // 1 + lambda2 * ~1
    }
    SUBCASE("empty cluster is rejected") {
        Clustering c2{2, 2, {0, 0, 0}, {0.0, 0.0, 9.0, 9.0}};
        CHECK_THROWS_AS((void)representative_weights(d, c2, 1, RfkmParams{}, 0.0),
                        std::invalid_argument);
    }
}

TEST_CASE("update_representative") {
    SUBCASE("degenerates to the exact centroid without fairness terms") {
        const Dataset d = gaussian_blobs(24, 3, 2, 1.0, 55);
        const Clustering c = init_random(d, 3, RngSeed{8});
        RfkmParams p;
        p.lambda1 = 0.0;
        p.lambda2 = 0.0;
        p.rep_tol = 0.0;
        const std::vector<double> centroids = compute_centroids(d, c.assignment, 3);
        for (std::size_t j = 0; j < 3; ++j) {
            const auto rep = update_representative(d, c, j, p);
            for (std::size_t a = 0; a < d.cols; ++a)
                CHECK(rep[a] == centroids[j * d.cols + a]);  // bitwise
        }
    }
    SUBCASE("a singleton stays on its member") {
        const Dataset d = make_dataset(3, 2, {0, 0, 1, 1, 8, 9});
        const Clustering c{2, 2, {0, 0, 1}, {0.5, 0.5, 8.0, 9.0}};
        RfkmParams p;  // defaults, lambda2 auto
        const auto rep = update_representative(d, c, 1, p);
        CHECK(rep[0] == doctest::Approx(8.0).epsilon(1e-12));
        CHECK(rep[1] == doctest::Approx(9.0).epsilon(1e-12));
    }
    SUBCASE("the smoothed-max weight drags the representative toward the outlier") {
        const Dataset d = make_dataset(4, 2, {2, 1, 1, 2, 2, 3, 5, 2});
        const Clustering c{1, 2, {0, 0, 0, 0}, {2.5, 2.0}};
        RfkmParams p;
        p.lambda1 = 0.0;
        p.lambda2 = 0.5;
        p.phi = 3.0;
        const auto rep = update_representative(d, c, 0, p);
        const std::vector<double> outlier{5.0, 2.0};
        CHECK(euclidean_distance(rep, outlier) <
              euclidean_distance(c.representative(0), outlier));
        Clustering updated = c;
        std::copy(rep.begin(), rep.end(), updated.representative_mut(0).begin());
        CHECK(objective(d, updated, p).total < objective(d, c, p).total);
    }
    SUBCASE("an update never worsens the exact objective, even when the drag overshoots") {
        const Dataset d = make_dataset(4, 2, {2, 1, 1, 2, 2, 3, 5, 2});
        const Clustering c{1, 2, {0, 0, 0, 0}, {2.5, 2.0}};
        RfkmParams p;
        p.lambda1 = 0.0;
        p.lambda2 = 5.0;  // strong enough that chasing the outlier backfires
        p.phi = 3.0;
        const auto rep = update_representative(d, c, 0, p);
        Clustering updated = c;
        std::copy(rep.begin(), rep.end(), updated.representative_mut(0).begin());
        CHECK(objective(d, updated, p).total <= objective(d, c, p).total);
    }
}

TEST_CASE("assignment sweep equals nearest-representative when weights vanish") {
    // Well-separated blobs with correct representatives: only border objects
    // move and no cluster ever shrinks toward a singleton.
    const Dataset d = gaussian_blobs(60, 2, 3, 1.4, 99);
    RfkmParams p;
    p.lambda1 = 0.0;
    p.lambda2 = 0.0;
    const Clustering start = init_random(d, 3, RngSeed{17});
    // give every cluster a sensible representative first
    Clustering c = start;
    c.representatives = compute_centroids(d, c.assignment, 3);
    const auto [stepped, stats] = assignment_step(d, c, p);
    for (std::size_t i = 0; i < d.rows; ++i) {
        int best = 0;
        double best_dist = squared_distance(d.row(i), c.representative(0));
        for (std::size_t j = 1; j < 3; ++j) {
            const double dist = squared_distance(d.row(i), c.representative(j));
            if (dist < best_dist) {
                best_dist = dist;
                best = static_cast<int>(j);
            }
        }
        CHECK(stepped.assignment[i] == best);
    }
    CHECK(stats.changed > 0);  // a random partition of blobs is never already optimal
}

TEST_CASE("the first object moves to the argmin of the exact objective") {
    // Object 0 is processed before any other move, so its decision can be
    // checked against brute-force evaluation of the full objective.
    const Dataset d = make_dataset(8, 2, {0, 0, 1, 0, 0, 1, 5, 5, 6, 5, 5, 6, 3, 2, 2, 3});
    Clustering c{2, 2, {0, 0, 0, 1, 1, 1, 0, 1}, {0.75, 0.75, 5.0, 5.0}};
    RfkmParams p;
    p.lambda1 = 0.7;
    p.lambda2 = 2.0;
    p.phi = 3.0;

    int expected = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < 2; ++j) {
        Clustering hypothetical = c;
        hypothetical.assignment[0] = j;
        const double total = objective_naive(d, hypothetical, p.lambda1, 2.0, p.phi);
        if (total < best) {
            best = total;
            expected = j;
        }
    }
    const auto [stepped, stats] = assignment_step(d, c, p);
    CHECK(stepped.assignment[0] == expected);
}

TEST_CASE("a sweep never increases the exact objective") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const std::size_t n = 20 + seed * 4;
        const std::size_t k = 2 + seed % 4;
        const Dataset d = gaussian_blobs(n, 3, k, 2.0, 7000 + seed);
        Clustering c = init_random(d, k, RngSeed{seed});
        RfkmParams p;
        p.lambda1 = 0.5 + 0.1 * static_cast<double>(seed % 5);
        p.lambda2 = static_cast<double>(n) / 10.0;
        p.phi = 3.0;
        const double before = objective_naive(d, c, p.lambda1, *p.lambda2, p.phi);
        const auto [stepped, stats] = assignment_step(d, c, p);
        const double after = objective_naive(d, stepped, p.lambda1, *p.lambda2, p.phi);
        CHECK(after <= before * (1.0 + 1e-6) + 1e-9);
    }
}

TEST_CASE("repeated sweeps reach a fixed point and stay monotone") {
    const Dataset d = gaussian_blobs(50, 2, 3, 1.5, 31);
    Clustering c = init_random(d, 3, RngSeed{2});
    RfkmParams p;  // defaults with lambda2 auto = 5
    double prev = objective_naive(d, c, p.lambda1, p.resolved_lambda2(d.rows), p.phi);
    bool converged = false;
    for (int sweep = 0; sweep < 10 && !converged; ++sweep) {
        auto [next, stats] = assignment_step(d, c, p);
        c = std::move(next);
        const double now = objective_naive(d, c, p.lambda1, p.resolved_lambda2(d.rows), p.phi);
        CHECK(now <= prev * (1.0 + 1e-6) + 1e-9);
        prev = now;
        converged = stats.changed == 0;
    }
    CHECK(converged);
}

TEST_CASE("the singleton guard pins the last member of a cluster") {
    const Dataset d = make_dataset(3, 2, {0, 0, 0.5, 0, 5, 5});
    // Object 2 would prefer cluster 0's representative, but it is alone.
    const Clustering c{2, 2, {0, 0, 1}, {0.25, 0.0, 10.0, 10.0}};
    RfkmParams p;
    p.lambda1 = 0.0;
    p.lambda2 = 0.0;
    const auto [stepped, stats] = assignment_step(d, c, p);
    CHECK(stepped.assignment == std::vector<int>{0, 0, 1});
    CHECK(stats.changed == 0);
}

TEST_CASE("incremental edit bookkeeping matches from-scratch recomputation") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Dataset d = gaussian_blobs(40, 3, 3, 1.5, 12000 + seed);
        RfkmParams p;
        p.seed = RngSeed{seed};
        p.check_edit_terms = true;
        const RfkmResult r = rfkm_fit(d, 3, p);
        CHECK(r.max_edit_check_error < 1e-9);
    }
}

TEST_CASE("rfkm with zero weights reproduces k-means exactly") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const Dataset d = gaussian_blobs(70 + 10 * seed, 3, 3, 1.0, 600 + seed);
        RfkmParams p;
        p.lambda1 = 0.0;
        p.lambda2 = 0.0;
        p.objective_tol = 0.0;
        p.rep_tol = 0.0;
        p.seed = RngSeed{seed};
        const RfkmResult fair = rfkm_fit(d, 3, p);
        const KMeansResult km = kmeans_fit(d, 3, RngSeed{seed}, p.max_outer_iters, 0.0);
        CHECK(fair.clustering.assignment == km.clustering.assignment);
        CHECK(fair.clustering.representatives == km.clustering.representatives);  // bitwise
        CHECK(fair.objective.total == km.objective);
    }
}

TEST_CASE("k = n puts every object on its own representative") {
    const Dataset d = gaussian_blobs(12, 2, 3, 1.0, 4);
    RfkmParams p;
    p.lambda2 = 2.0;
    p.phi = 3.0;
    const RfkmResult r = rfkm_fit(d, d.rows, p);
    const auto sizes = r.clustering.cluster_sizes();
    for (std::size_t s : sizes) CHECK(s == 1);
    CHECK(r.objective.term1 == doctest::Approx(0.0));
    // only the smoothed max survives: lambda2 * ln(n) / phi
    CHECK(r.objective.total ==
          doctest::Approx(2.0 * std::log(12.0) / 3.0).epsilon(1e-9));
}

TEST_CASE("rfkm can find the fairer two-cluster configuration") {
    RfkmParams p = toy_params();
    double best = std::numeric_limits<double>::infinity();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        p.seed = RngSeed{seed};
        best = std::min(best, rfkm_fit(kFive, 2, p).objective.total);
    }
    // the pairing configuration scores ~15.12; the lone-outlier one ~18.88
    CHECK(best == doctest::Approx(15.1181).epsilon(1e-3));
}

TEST_CASE("rfkm runs are deterministic for a fixed seed") {
    const Dataset d = gaussian_blobs(50, 3, 3, 1.2, 21);
    RfkmParams p;
    p.seed = RngSeed{123};
    const RfkmResult a = rfkm_fit(d, 3, p);
    const RfkmResult b = rfkm_fit(d, 3, p);
    CHECK(a.clustering.assignment == b.clustering.assignment);
    CHECK(a.clustering.representatives == b.clustering.representatives);
    CHECK(a.objective.total == b.objective.total);
    CHECK(clustering_to_json(a.clustering) == clustering_to_json(b.clustering));
}

TEST_CASE("the outer loop's recorded objective never increases materially") {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const Dataset d = gaussian_blobs(80, 4, 4, 1.5, 880 + seed);
        RfkmParams p;
        p.seed = RngSeed{seed};
        const RfkmResult r = rfkm_fit(d, 4, p);
        REQUIRE(r.objective_history.size() >= 2);
        for (std::size_t i = 1; i < r.objective_history.size(); ++i)
            CHECK(r.objective_history[i] <=
                  r.objective_history[i - 1] * (1.0 + 1e-6) + 1e-9);
    }
}

TEST_CASE("parameter validation") {
    CHECK(RfkmParams{}.resolved_lambda2(200) == doctest::Approx(20.0));
    RfkmParams p;
    p.lambda2 = 0.25;
    CHECK(p.resolved_lambda2(200) == 0.25);

    RfkmParams bad;
    bad.lambda1 = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = RfkmParams{};
    bad.phi = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = RfkmParams{};
    bad.max_outer_iters = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
