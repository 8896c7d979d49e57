#include "rfkm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "json.hpp"

#include "rfkm/distance.hpp"

namespace rfkm {

RepresentativityVector representativity(const Dataset& d, const Clustering& c) {
    check_consistent(d, c);
    RepresentativityVector r;
    r.values.resize(d.rows);
    for (std::size_t i = 0; i < d.rows; ++i)
        r.values[i] = euclidean_distance(d.row(i), c.representative(
                          static_cast<std::size_t>(c.assignment[i])));
    return r;
}

double avg(const RepresentativityVector& r) {
    if (r.values.empty()) throw std::invalid_argument("avg: empty representativity vector");
    double acc = 0.0;
    for (double v : r.values) acc += v;
    return acc / static_cast<double>(r.values.size());
}

double variance(const RepresentativityVector& r, VarianceMode mode) {
    const std::size_t n = r.values.size();
    if (n < 1) throw std::invalid_argument("variance: empty representativity vector");
    if (mode == VarianceMode::sample && n < 2)
        throw std::invalid_argument("variance: sample mode needs at least 2 values");
    const double mean = avg(r);
    double acc = 0.0;
    for (double v : r.values) acc += (v - mean) * (v - mean);
    const double denom = mode == VarianceMode::population ? static_cast<double>(n)
                                                          : static_cast<double>(n - 1);
    return acc / denom;
}

double jain(const RepresentativityVector& r) {
    const std::size_t n = r.values.size();
    if (n < 1) throw std::invalid_argument("jain: empty representativity vector");
    double sum = 0.0, sum_sq = 0.0;
    for (double v : r.values) {
        sum += v;
        sum_sq += v * v;
    }
    if (sum_sq == 0.0) return 1.0;  // all-zero vector is perfectly uniform
    return sum * sum / (static_cast<double>(n) * sum_sq);
}

double max_representativity_loss(const RepresentativityVector& r) {
    if (r.values.empty()) throw std::invalid_argument("max: empty representativity vector");
    return *std::max_element(r.values.begin(), r.values.end());
}

double silhouette(const Dataset& d, const Clustering& c) {
    check_consistent(d, c);
    if (c.k < 2) throw std::invalid_argument("silhouette: needs at least 2 clusters");
    const auto sizes = c.cluster_sizes();
    for (std::size_t j = 0; j < c.k; ++j)
        if (sizes[j] == 0)
            throw std::invalid_argument("silhouette: cluster " + std::to_string(j) + " is empty");

    const std::size_t n = d.rows;
    double total = 0.0;
    std::vector<double> mean_dist(c.k);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t own = static_cast<std::size_t>(c.assignment[i]);
        if (sizes[own] == 1) continue;  // singleton scores 0
        std::fill(mean_dist.begin(), mean_dist.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            mean_dist[static_cast<std::size_t>(c.assignment[j])] +=
                euclidean_distance(d.row(i), d.row(j));
        }
        const double a = mean_dist[own] / static_cast<double>(sizes[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < c.k; ++j) {
            if (j == own) continue;
            b = std::min(b, mean_dist[j] / static_cast<double>(sizes[j]));
        }
        const double hi = std::max(a, b);
        total += hi > 0.0 ? (b - a) / hi : 0.0;
    }
    return total / static_cast<double>(n);
}

double purity(const Clustering& c, const std::vector<std::string>& labels) {
    if (labels.size() != c.assignment.size())
        throw std::invalid_argument("purity: label count " + std::to_string(labels.size()) +
                                    " does not match assignment length " +
                                    std::to_string(c.assignment.size()));
    std::vector<std::map<std::string, std::size_t>> counts(c.k);
    for (std::size_t i = 0; i < labels.size(); ++i)
        ++counts[static_cast<std::size_t>(c.assignment[i])][labels[i]];
    std::size_t agreed = 0;
    for (const auto& cluster_counts : counts) {
        std::size_t best = 0;
        for (const auto& [label, count] : cluster_counts) best = std::max(best, count);
        agreed += best;
    }
    return static_cast<double>(agreed) / static_cast<double>(labels.size());
}

MetricsReport compute_metrics(const Dataset& d, const Clustering& c) {
    const RepresentativityVector r = representativity(d, c);
    MetricsReport m;
    m.avg = avg(r);
    m.var_population = variance(r, VarianceMode::population);
    m.var_sample = r.values.size() >= 2 ? variance(r, VarianceMode::sample) : 0.0;
    m.jain = jain(r);
    m.max = max_representativity_loss(r);
    if (c.k >= 2) m.silhouette = silhouette(d, c);
    if (d.has_labels()) m.purity = purity(c, d.labels);
    return m;
}

std::string metrics_to_json(const MetricsReport& m) {
    nlohmann::ordered_json j;
    j["avg"] = m.avg;
    j["var_population"] = m.var_population;
    j["var_sample"] = m.var_sample;
    j["jain"] = m.jain;
    j["max"] = m.max;
    if (m.silhouette) j["silhouette"] = *m.silhouette;
    if (m.purity) j["purity"] = *m.purity;
    return j.dump(2) + "\n";
}

}  // namespace rfkm
