#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rfkm/clustering.hpp"
#include "rfkm/dataset.hpp"

namespace rfkm {

// Euclidean distance of each object to its assigned representative.
struct RepresentativityVector {
    std::vector<double> values;  // length n, all finite and >= 0
};

enum class VarianceMode { population, sample };

// One evaluation record per clustering: the fairness measures over the
// representativity vector plus the two clustering-quality scores.
struct MetricsReport {
    double avg = 0.0;
    double var_population = 0.0;
    double var_sample = 0.0;
    double jain = 0.0;
    double max = 0.0;
    std::optional<double> silhouette;  // absent when k < 2
    std::optional<double> purity;      // absent when the dataset has no labels
};

RepresentativityVector representativity(const Dataset& d, const Clustering& c);

double avg(const RepresentativityVector& r);

// population divides by n, sample by n-1. Published tables tend to use the
// sample convention while the defining formula divides by n, so reports
// carry both.
double variance(const RepresentativityVector& r, VarianceMode mode);

// (sum x)^2 / (n * sum x^2), in (0,1]; 1 iff all entries are equal.
// An all-zero vector is perfectly uniform, so it scores 1 by convention.
double jain(const RepresentativityVector& r);

double max_representativity_loss(const RepresentativityVector& r);

// Mean per-object silhouette with Euclidean distance; an object in a
// singleton cluster scores 0. Requires k >= 2 and no empty clusters.
double silhouette(const Dataset& d, const Clustering& c);

// Fraction of objects whose cluster's majority label is their own.
double purity(const Clustering& c, const std::vector<std::string>& labels);

// Full report; silhouette computed only when k >= 2, purity only when
// labels are present.
MetricsReport compute_metrics(const Dataset& d, const Clustering& c);

// Flat JSON object with the fixed key names; optional entries are omitted
// when absent.
std::string metrics_to_json(const MetricsReport& m);

}  // namespace rfkm
