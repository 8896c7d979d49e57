#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rfkm/dataset.hpp"
#include "rfkm/format.hpp"
#include "rfkm/harness.hpp"
#include "rfkm/kmeans.hpp"
#include "rfkm/metrics.hpp"
#include "rfkm/rfkm.hpp"

namespace {

using namespace rfkm;

// Argument problems discovered after flag parsing; mapped to exit code 2
// like any other usage error.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

char parse_delimiter(const std::string& s) {
    if (s == "tab") return '\t';
    if (s.size() == 1) return s[0];
    throw UsageError("--delimiter: expected a single character or \"tab\"");
}

std::optional<std::size_t> parse_k(const std::string& s) {
    if (s == "auto") return std::nullopt;
    try {
        const long long v = std::stoll(s);
        if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    throw UsageError("--k: expected a positive integer or \"auto\"");
}

std::optional<double> parse_lambda2(const std::string& s) {
    if (s == "auto") return std::nullopt;
    try {
        const double v = std::stod(s);
        if (v >= 0.0) return v;
    } catch (const std::exception&) {
    }
    throw UsageError("--lambda2: expected a real >= 0 or \"auto\"");
}

std::size_t resolve_k(const std::optional<std::size_t>& k, const Dataset& d) {
    if (k) {
        if (*k > d.rows) throw UsageError("--k: more clusters than objects");
        return *k;
    }
    if (!d.has_labels()) throw UsageError("--k auto requires --label-column");
    return d.distinct_labels();
}

void print_metrics(std::ostream& out, const MetricsReport& m) {
    out << "avg             " << format_sig6(m.avg) << '\n';
    out << "var_population  " << format_sig6(m.var_population) << '\n';
    out << "var_sample      " << format_sig6(m.var_sample) << '\n';
    out << "jain            " << format_sig6(m.jain) << '\n';
    out << "max             " << format_sig6(m.max) << '\n';
    if (m.silhouette) out << "silhouette      " << format_sig6(*m.silhouette) << '\n';
    if (m.purity) out << "purity          " << format_sig6(*m.purity) << '\n';
}

struct FitArgs {
    std::string input;
    std::string k = "auto";
    std::string method = "rfkm";
    double lambda1 = 1.0;
    std::string lambda2 = "auto";
    double phi = 3.0;
    std::uint64_t seed = 0;
    bool normalize = false;
    std::string out = "clustering.json";
    std::string label_column;
    std::string delimiter = ",";
};

int run_fit(const FitArgs& a) {
    if (a.lambda1 < 0.0) throw UsageError("--lambda1: expected a real >= 0");
    if (!(a.phi > 0.0)) throw UsageError("--phi: expected a real > 0");
    RfkmParams p;
    p.lambda1 = a.lambda1;
    p.lambda2 = parse_lambda2(a.lambda2);
    p.phi = a.phi;
    p.seed = RngSeed{a.seed};
    const auto k_opt = parse_k(a.k);

    Dataset d = load_csv(a.input, a.label_column, parse_delimiter(a.delimiter));
    if (a.normalize) d = normalize_min_max(d);
    const std::size_t k = resolve_k(k_opt, d);

    Clustering c;
    int iterations = 0;
    if (a.method == "km") {
        KMeansResult r = kmeans_fit(d, k, p.seed, p.max_outer_iters, p.objective_tol);
        c = std::move(r.clustering);
        iterations = r.iterations;
    } else {
        RfkmResult r = rfkm_fit(d, k, p);
        c = std::move(r.clustering);
        iterations = r.iterations;
    }
    save_clustering_json(c, a.out);

    const ObjectiveBreakdown obj = objective(d, c, p);
    std::cout << "method " << a.method << "  n=" << d.rows << " m=" << d.cols << " k=" << k
              << "  seed=" << a.seed << "  iterations=" << iterations << '\n';
    std::cout << "objective       " << format_sig6(obj.total) << "  (sum " << format_sig6(obj.term1)
              << ", squared " << format_sig6(obj.term2) << ", smooth_max "
              << format_sig6(obj.term3) << ")\n";
    print_metrics(std::cout, compute_metrics(d, c));
    std::cout << "clustering written to " << a.out << '\n';
    return 0;
}

struct EvalArgs {
    std::string input;
    std::string clustering;
    std::string label_column;
    std::string delimiter = ",";
    bool normalize = false;
};

int run_eval(const EvalArgs& a) {
    Dataset d = load_csv(a.input, a.label_column, parse_delimiter(a.delimiter));
    if (a.normalize) d = normalize_min_max(d);
    const Clustering c = load_clustering_json(a.clustering);
    check_consistent(d, c);
    std::cout << "n=" << d.rows << " m=" << d.cols << " k=" << c.k << '\n';
    print_metrics(std::cout, compute_metrics(d, c));
    return 0;
}

struct BenchArgs {
    std::string config;
};

int run_bench(const BenchArgs& a) {
    const ExperimentConfig cfg = parse_config_file(a.config);
    std::vector<ExperimentReport> reports;
    if (cfg.lambda1_sweep.empty())
        reports.push_back(run_experiment(cfg));
    else
        reports = lambda1_sweep_experiment(cfg);

    const std::string json_path = cfg.out_json.empty() ? "rfkm_report.json" : cfg.out_json;
    const std::string csv_path = cfg.out_csv.empty() ? "rfkm_runs.csv" : cfg.out_csv;
    {
        std::ofstream out(json_path);
        if (!out) throw std::runtime_error("cannot write \"" + json_path + "\"");
        out << (reports.size() == 1 ? report_to_json(reports.front()) : reports_to_json(reports));
    }
    {
        std::ofstream out(csv_path);
        if (!out) throw std::runtime_error("cannot write \"" + csv_path + "\"");
        out << runs_to_csv(reports);
    }

    double wall = 0.0;
    for (const ExperimentReport& r : reports) {
        std::cout << render_comparison(r) << '\n';
        for (const MethodSummary& s : r.methods) wall += s.wall_time_total;
    }
    std::cout << "report written to " << json_path << ", runs to " << csv_path << '\n';
    std::cerr << "total fit time " << format_sig6(wall) << "s\n";
    return 0;
}

// The two hand-sized single-cluster / two-cluster examples with known-good
// behaviour; prints the comparison and exits non-zero if any expected
// relation fails, so it doubles as a smoke test of a built binary.
int run_toy(int toy_case) {
    int failures = 0;
    auto expect = [&](bool ok, const std::string& what) {
        if (!ok) {
            ++failures;
            std::cerr << "check failed: " << what << '\n';
        }
    };
    auto row = [](const std::string& label, double a, double b) {
        std::printf("%-10s %12s %12s\n", label.c_str(), format_sig6(a).c_str(),
                    format_sig6(b).c_str());
    };

    if (toy_case == 1) {
        // One cluster of four points, two candidate representatives: the
        // centroid against one nudged toward the far-right point.
        const Dataset d = make_dataset(4, 2, {2, 1, 1, 2, 2, 3, 5, 2});
        Clustering centroid{1, 2, {0, 0, 0, 0}, {2.5, 2.0}};
        Clustering nudged{1, 2, {0, 0, 0, 0}, {3.0, 2.0}};
        const MetricsReport a = compute_metrics(d, centroid);
        const MetricsReport b = compute_metrics(d, nudged);
        std::printf("%-10s %12s %12s\n", "", "centroid", "nudged");
        const RepresentativityVector ra = representativity(d, centroid);
        const RepresentativityVector rb = representativity(d, nudged);
        for (std::size_t i = 0; i < d.rows; ++i)
            row("R[" + std::to_string(i) + "]", ra.values[i], rb.values[i]);
        row("Avg", a.avg, b.avg);
        row("Max", a.max, b.max);
        row("Var", a.var_sample, b.var_sample);
        row("Jain", a.jain, b.jain);
        expect(b.max < a.max, "nudged improves Max");
        expect(b.var_sample < a.var_sample, "nudged improves Var");
        expect(b.jain > a.jain, "nudged improves Jain");
        expect(a.avg < b.avg, "centroid keeps the better Avg");
    } else {
        // Five points, two clusterings: a lone far point in its own cluster
        // versus pairing it with its nearest neighbour.
        const Dataset d = make_dataset(5, 2, {1, 1, 1, 2, 2, 1, 3, 3, 5, 5});
        Clustering lone{2, 2, {0, 0, 0, 0, 1}, {1.75, 1.75, 5.0, 5.0}};
        Clustering paired{2, 2, {0, 0, 0, 1, 1}, {4.0 / 3.0, 4.0 / 3.0, 4.0, 4.0}};
        const MetricsReport a = compute_metrics(d, lone);
        const MetricsReport b = compute_metrics(d, paired);
        std::printf("%-10s %12s %12s\n", "", "lone", "paired");
        const RepresentativityVector ra = representativity(d, lone);
        const RepresentativityVector rb = representativity(d, paired);
        for (std::size_t i = 0; i < d.rows; ++i)
            row("R[" + std::to_string(i) + "]", ra.values[i], rb.values[i]);
        row("Avg", a.avg, b.avg);
        row("Max", a.max, b.max);
        row("Var", a.var_sample, b.var_sample);
        row("Jain", a.jain, b.jain);
        RfkmParams p;
        p.lambda1 = 1.0;
        p.lambda2 = 0.5;
        p.phi = 3.0;
        const ObjectiveBreakdown oa = objective(d, lone, p);
        const ObjectiveBreakdown ob = objective(d, paired, p);
        row("objective", oa.total, ob.total);
        expect(b.max < a.max, "paired improves Max");
        expect(b.var_sample < a.var_sample, "paired improves Var");
        expect(b.jain > a.jain, "paired improves Jain");
        expect(a.avg < b.avg, "lone keeps the better Avg");
        expect(oa.total > ob.total, "paired improves the fair objective");
    }
    if (failures) std::cerr << failures << " check(s) failed\n";
    return failures ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"representativity-fair k-means clustering"};
    app.require_subcommand(1);

    FitArgs fit_args;
    CLI::App* fit = app.add_subcommand("fit", "cluster a CSV file and save the clustering");
    fit->add_option("--input", fit_args.input, "CSV file with a header line")->required();
    fit->add_option("--k", fit_args.k, "cluster count, or auto (= distinct labels)")
        ->capture_default_str();
    fit->add_option("--method", fit_args.method, "clustering method")
        ->check(CLI::IsMember({"km", "rfkm"}))
        ->capture_default_str();
    fit->add_option("--lambda1", fit_args.lambda1, "weight of the squared-loss term")
        ->capture_default_str();
    fit->add_option("--lambda2", fit_args.lambda2, "weight of the smoothed-max term, or auto (= n/10)")
        ->capture_default_str();
    fit->add_option("--phi", fit_args.phi, "smoothed-max sharpness")->capture_default_str();
    fit->add_option("--seed", fit_args.seed, "random seed")->capture_default_str();
    fit->add_flag("--normalize", fit_args.normalize, "min-max scale each attribute to [0,1]");
    fit->add_option("--out", fit_args.out, "output clustering JSON")->capture_default_str();
    fit->add_option("--label-column", fit_args.label_column, "name of the label column");
    fit->add_option("--delimiter", fit_args.delimiter, "cell delimiter, or tab")
        ->capture_default_str();

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "metrics of a saved clustering on a CSV file");
    eval->add_option("--input", eval_args.input, "CSV file with a header line")->required();
    eval->add_option("--clustering", eval_args.clustering, "clustering JSON")->required();
    eval->add_option("--label-column", eval_args.label_column, "name of the label column");
    eval->add_option("--delimiter", eval_args.delimiter, "cell delimiter, or tab")
        ->capture_default_str();
    eval->add_flag("--normalize", eval_args.normalize,
                   "min-max scale each attribute to [0,1] before evaluating");

    BenchArgs bench_args;
    CLI::App* bench = app.add_subcommand("bench", "run a multi-restart experiment from a config");
    bench->add_option("--config", bench_args.config, "experiment config file")->required();

    int toy_case = 0;
    CLI::App* toy = app.add_subcommand("toy", "built-in worked examples with self-checks");
    toy->add_option("--case", toy_case, "1 = vary the representative, 2 = vary the memberships")
        ->required()
        ->check(CLI::IsMember({1, 2}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return 0;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (fit->parsed()) return run_fit(fit_args);
        if (eval->parsed()) return run_eval(eval_args);
        if (bench->parsed()) return run_bench(bench_args);
        if (toy->parsed()) return run_toy(toy_case);
    } catch (const UsageError& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
