#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfkm/dataset.hpp"
#include "rfkm/metrics.hpp"
#include "rfkm/rfkm.hpp"
#include "rfkm/rng.hpp"

namespace rfkm {

enum class Method { km, rfkm };

std::string method_name(Method m);

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Declarative description of one experiment: a dataset, the methods to
// compare, and how many seeded restarts to average over.
struct ExperimentConfig {
    std::string dataset_path;
    std::string label_column;  // empty = no label column
    char delimiter = ',';
    std::optional<std::size_t> k;  // nullopt = number of distinct labels
    std::vector<Method> methods = {Method::km, Method::rfkm};
    int restarts = 10;
    std::uint64_t base_seed = 0;
    RfkmParams params;
    bool normalize = false;
    std::vector<double> lambda1_sweep;  // empty = single run at params.lambda1
    int workers = 0;                    // 0 = hardware concurrency
    std::string out_json;               // empty = no file
    std::string out_csv;                // empty = no file

    void validate() const;  // throws ConfigError
};

// Parses `key = value` lines ('#' comments, blank lines ignored). Unknown
// keys, duplicate keys and malformed values raise ConfigError naming the key.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

struct RunResult {
    Method method = Method::km;
    double lambda1 = 0.0;
    int restart = 0;
    RngSeed seed;
    MetricsReport metrics;
    ObjectiveBreakdown objective;  // shared objective evaluated at the final clustering
    int iterations = 0;
    double wall_time = 0.0;  // seconds; kept out of report files, which must be byte-stable
};

struct MetricStats {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation; 0 for a single restart
};

struct MethodSummary {
    Method method = Method::km;
    std::vector<RunResult> runs;  // ordered by restart index
    MetricStats avg, var_population, var_sample, jain, max;
    std::optional<MetricStats> silhouette;  // absent when k < 2
    std::optional<MetricStats> purity;      // absent without labels
    MetricStats objective_total;
    MetricStats iterations;
    double wall_time_total = 0.0;
};

// Signed relative difference of the method means against the K-Means means,
// in percent, oriented so that positive always means the other method did
// better (lower avg/var/max, higher jain/silhouette/purity).
struct ImprovementRow {
    std::string metric;
    double percent = 0.0;
};

struct ExperimentReport {
    std::string dataset_path;
    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t k = 0;
    int restarts = 0;
    std::uint64_t base_seed = 0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;  // resolved value
    double phi = 0.0;
    bool normalize = false;
    std::vector<MethodSummary> methods;
    std::vector<ImprovementRow> improvement_vs_km;  // empty unless both methods ran
};

// Runs every method for `restarts` seeded restarts (seed of restart i of a
// method depends only on base_seed, the method and i) and aggregates means
// and deviations per metric. Restarts run concurrently; the report is
// independent of the worker count.
ExperimentReport run_experiment(const ExperimentConfig& cfg, const Dataset& d);

// Convenience: loads (and optionally normalizes) the dataset first.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// One report per lambda1 value, everything else fixed. Seeds do not depend
// on lambda1, so each report is comparable run-for-run.
std::vector<ExperimentReport> lambda1_sweep_experiment(const ExperimentConfig& cfg);

std::string report_to_json(const ExperimentReport& report);
std::string reports_to_json(const std::vector<ExperimentReport>& reports);

// Flat per-run rows (one line per method x restart, lambda1 first so sweep
// output is plot-ready). Optional metrics render as empty cells.
std::string runs_to_csv(const std::vector<ExperimentReport>& reports);

// Fixed-width comparison of per-method means: a fairness block (Var, Jain,
// Max) and a quality block (Avg, Sil, Pur), with the improvement row when
// both methods ran.
std::string render_comparison(const ExperimentReport& report);

}  // namespace rfkm
