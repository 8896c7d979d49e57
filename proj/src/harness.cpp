#include "rfkm/harness.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <span>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "rfkm/format.hpp"
#include "rfkm/kmeans.hpp"

namespace rfkm {

namespace {

using ordered_json = nlohmann::ordered_json;

std::uint64_t method_stream(Method m) {
    // Fixed stream ids: seeds of one method never depend on which others run.
    switch (m) {
        case Method::km: return 0;
        case Method::rfkm: return 1;
    }
    throw std::logic_error("method_stream: bad enum");
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& expected) {
    throw ConfigError("config: key \"" + key + "\": bad value \"" + value + "\" (expected " +
                      expected + ")");
}

long long parse_int(const std::string& key, const std::string& value) {
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        bad_value(key, value, "an integer");
    return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        bad_value(key, value, "an unsigned integer");
    return out;
}

double parse_real(const std::string& key, const std::string& value) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size() || !std::isfinite(out))
        bad_value(key, value, "a finite real");
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true") return true;
    if (value == "false") return false;
    bad_value(key, value, "true or false");
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) parts.push_back(trim(item));
    return parts;
}

Dataset load_dataset(const ExperimentConfig& cfg) {
    Dataset d = load_csv(cfg.dataset_path, cfg.label_column, cfg.delimiter);
    return cfg.normalize ? normalize_min_max(d) : d;
}

MetricStats stats_of(const std::vector<double>& xs) {
    MetricStats s;
    if (xs.empty()) return s;
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / static_cast<double>(xs.size());
    if (xs.size() >= 2) {
        double acc = 0.0;
        for (double x : xs) acc += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(acc / static_cast<double>(xs.size() - 1));
    }
    return s;
}

MethodSummary summarize(Method method, std::vector<RunResult> runs) {
    MethodSummary s;
    s.method = method;
    auto collect = [&](auto&& get) {
        std::vector<double> xs;
        xs.reserve(runs.size());
        for (const RunResult& r : runs) xs.push_back(get(r));
        return stats_of(xs);
    };
    s.avg = collect([](const RunResult& r) { return r.metrics.avg; });
    s.var_population = collect([](const RunResult& r) { return r.metrics.var_population; });
    s.var_sample = collect([](const RunResult& r) { return r.metrics.var_sample; });
    s.jain = collect([](const RunResult& r) { return r.metrics.jain; });
    s.max = collect([](const RunResult& r) { return r.metrics.max; });
    if (!runs.empty() && runs.front().metrics.silhouette)
        s.silhouette = collect([](const RunResult& r) { return *r.metrics.silhouette; });
    if (!runs.empty() && runs.front().metrics.purity)
        s.purity = collect([](const RunResult& r) { return *r.metrics.purity; });
    s.objective_total = collect([](const RunResult& r) { return r.objective.total; });
    s.iterations = collect([](const RunResult& r) { return static_cast<double>(r.iterations); });
    for (const RunResult& r : runs) s.wall_time_total += r.wall_time;
    s.runs = std::move(runs);
    return s;
}

struct MetricColumn {
    const char* key;    // report/json name
    const char* label;  // table row label
    bool lower_is_better;
    std::optional<MetricStats> (*pick)(const MethodSummary&);
};

const MetricColumn kFairnessColumns[] = {
    {"var_sample", "Var", true, [](const MethodSummary& s) { return std::optional(s.var_sample); }},
    {"jain", "Jain", false, [](const MethodSummary& s) { return std::optional(s.jain); }},
    {"max", "Max", true, [](const MethodSummary& s) { return std::optional(s.max); }},
};
const MetricColumn kQualityColumns[] = {
    {"avg", "Avg", true, [](const MethodSummary& s) { return std::optional(s.avg); }},
    {"silhouette", "Sil", false, [](const MethodSummary& s) { return s.silhouette; }},
    {"purity", "Pur", false, [](const MethodSummary& s) { return s.purity; }},
};

const MethodSummary* find_method(const ExperimentReport& report, Method m) {
    for (const MethodSummary& s : report.methods)
        if (s.method == m) return &s;
    return nullptr;
}

std::vector<ImprovementRow> improvements(const ExperimentReport& report) {
    std::vector<ImprovementRow> rows;
    const MethodSummary* km = find_method(report, Method::km);
    const MethodSummary* other = find_method(report, Method::rfkm);
    if (!km || !other) return rows;
    auto add = [&](const MetricColumn& col) {
        const auto base = col.pick(*km);
        const auto ours = col.pick(*other);
        if (!base || !ours) return;
        const double denom = std::abs(base->mean);
        if (denom < 1e-300) return;  // nothing meaningful to report against
        const double delta =
            col.lower_is_better ? base->mean - ours->mean : ours->mean - base->mean;
        rows.push_back({col.key, 100.0 * delta / denom});
    };
    for (const MetricColumn& col : kFairnessColumns) add(col);
    for (const MetricColumn& col : kQualityColumns) add(col);
    return rows;
}

ordered_json stats_json(const MetricStats& s) {
    return ordered_json{{"mean", s.mean}, {"stddev", s.stddev}};
}

ordered_json summary_json(const MethodSummary& s) {
    ordered_json j;
    j["restarts"] = s.runs.size();
    ordered_json m;
    m["avg"] = stats_json(s.avg);
    m["var_population"] = stats_json(s.var_population);
    m["var_sample"] = stats_json(s.var_sample);
    m["jain"] = stats_json(s.jain);
    m["max"] = stats_json(s.max);
    if (s.silhouette) m["silhouette"] = stats_json(*s.silhouette);
    if (s.purity) m["purity"] = stats_json(*s.purity);
    j["metrics"] = std::move(m);
    j["objective_total"] = stats_json(s.objective_total);
    j["iterations"] = stats_json(s.iterations);
    return j;
}

ordered_json report_json(const ExperimentReport& r) {
    ordered_json j;
    j["dataset"] = r.dataset_path;
    j["n"] = r.n;
    j["m"] = r.m;
    j["k"] = r.k;
    j["restarts"] = r.restarts;
    j["base_seed"] = r.base_seed;
    j["lambda1"] = r.lambda1;
    j["lambda2"] = r.lambda2;
    j["phi"] = r.phi;
    j["normalize"] = r.normalize;
    ordered_json methods;
    for (const MethodSummary& s : r.methods) methods[method_name(s.method)] = summary_json(s);
    j["methods"] = std::move(methods);
    if (!r.improvement_vs_km.empty()) {
        ordered_json imp;
        for (const ImprovementRow& row : r.improvement_vs_km) imp[row.metric] = row.percent;
        j["improvement_vs_km_percent"] = std::move(imp);
    }
    return j;
}

}  // namespace

std::string method_name(Method m) {
    switch (m) {
        case Method::km: return "km";
        case Method::rfkm: return "rfkm";
    }
    throw std::logic_error("method_name: bad enum");
}

void ExperimentConfig::validate() const {
    if (dataset_path.empty()) throw ConfigError("config: key \"dataset\" is required");
    if (restarts < 1) throw ConfigError("config: key \"restarts\": must be >= 1");
    if (methods.empty()) throw ConfigError("config: key \"methods\": at least one method");
    std::set<Method> seen;
    for (Method m : methods)
        if (!seen.insert(m).second)
            throw ConfigError("config: key \"methods\": duplicate \"" + method_name(m) + "\"");
    if (k && *k < 1) throw ConfigError("config: key \"k\": must be >= 1 or auto");
    if (params.lambda1 < 0.0) throw ConfigError("config: key \"lambda1\": must be >= 0");
    if (params.lambda2 && *params.lambda2 < 0.0)
        throw ConfigError("config: key \"lambda2\": must be >= 0 or auto");
    if (!(params.phi > 0.0)) throw ConfigError("config: key \"phi\": must be > 0");
    if (params.max_outer_iters < 1)
        throw ConfigError("config: key \"max_outer_iters\": must be >= 1");
    if (params.max_rep_fixed_point_iters < 1)
        throw ConfigError("config: key \"max_rep_iters\": must be >= 1");
    if (params.rep_tol < 0.0) throw ConfigError("config: key \"rep_tol\": must be >= 0");
    if (params.objective_tol < 0.0)
        throw ConfigError("config: key \"objective_tol\": must be >= 0");
    for (double v : lambda1_sweep)
        if (v < 0.0 || !std::isfinite(v))
            throw ConfigError("config: key \"lambda1_sweep\": values must be finite and >= 0");
    if (workers < 0) throw ConfigError("config: key \"workers\": must be >= 0");
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(line_no) +
                              ": expected \"key = value\"");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config: line " + std::to_string(line_no) + ": empty key");
        if (!seen.insert(key).second)
            throw ConfigError("config: key \"" + key + "\" appears twice");

        if (key == "dataset") {
            cfg.dataset_path = value;
        } else if (key == "label_column") {
            cfg.label_column = value;
        } else if (key == "delimiter") {
            if (value == "tab")
                cfg.delimiter = '\t';
            else if (value.size() == 1)
                cfg.delimiter = value[0];
            else
                bad_value(key, value, "a single character or \"tab\"");
        } else if (key == "k") {
            if (value == "auto") {
                cfg.k.reset();
            } else {
                const long long v = parse_int(key, value);
                if (v < 1) bad_value(key, value, "a positive integer or \"auto\"");
                cfg.k = static_cast<std::size_t>(v);
            }
        } else if (key == "methods") {
            cfg.methods.clear();
            for (const std::string& name : split_list(value)) {
                if (name == "km")
                    cfg.methods.push_back(Method::km);
                else if (name == "rfkm")
                    cfg.methods.push_back(Method::rfkm);
                else
                    bad_value(key, name, "km or rfkm");
            }
        } else if (key == "restarts") {
            cfg.restarts = static_cast<int>(parse_int(key, value));
        } else if (key == "base_seed") {
            cfg.base_seed = parse_u64(key, value);
        } else if (key == "lambda1") {
            cfg.params.lambda1 = parse_real(key, value);
        } else if (key == "lambda2") {
            if (value == "auto")
                cfg.params.lambda2.reset();
            else
                cfg.params.lambda2 = parse_real(key, value);
        } else if (key == "phi") {
            cfg.params.phi = parse_real(key, value);
        } else if (key == "max_outer_iters") {
            cfg.params.max_outer_iters = static_cast<int>(parse_int(key, value));
        } else if (key == "max_rep_iters") {
            cfg.params.max_rep_fixed_point_iters = static_cast<int>(parse_int(key, value));
        } else if (key == "rep_tol") {
            cfg.params.rep_tol = parse_real(key, value);
        } else if (key == "objective_tol") {
            cfg.params.objective_tol = parse_real(key, value);
        } else if (key == "normalize") {
            cfg.normalize = parse_bool(key, value);
        } else if (key == "lambda1_sweep") {
            cfg.lambda1_sweep.clear();
            for (const std::string& item : split_list(value))
                cfg.lambda1_sweep.push_back(parse_real(key, item));
            if (cfg.lambda1_sweep.empty()) bad_value(key, value, "a comma-separated list");
        } else if (key == "workers") {
            cfg.workers = static_cast<int>(parse_int(key, value));
        } else if (key == "out_json") {
            cfg.out_json = value;
        } else if (key == "out_csv") {
            cfg.out_csv = value;
        } else {
            throw ConfigError("config: unknown key \"" + key + "\"");
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open \"" + path + "\"");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const Dataset& d) {
    cfg.validate();
    std::size_t k;
    if (cfg.k) {
        k = *cfg.k;
    } else {
        if (!d.has_labels())
            throw ConfigError("config: key \"k\": auto requires a label column");
        k = d.distinct_labels();
    }
    if (k > d.rows) throw ConfigError("config: key \"k\": more clusters than objects");
    const RfkmParams& p = cfg.params;

    const std::size_t restarts = static_cast<std::size_t>(cfg.restarts);
    const std::size_t total = cfg.methods.size() * restarts;
    std::vector<RunResult> results(total);

    auto run_one = [&](std::size_t t) {
        const Method method = cfg.methods[t / restarts];
        const int restart = static_cast<int>(t % restarts);
        RunResult r;
        r.method = method;
        r.lambda1 = p.lambda1;
        r.restart = restart;
        r.seed = derive_seed(RngSeed{cfg.base_seed}, method_stream(method),
                             static_cast<std::uint64_t>(restart));
        const auto t0 = std::chrono::steady_clock::now();
        Clustering c;
        if (method == Method::km) {
            KMeansResult res = kmeans_fit(d, k, r.seed, p.max_outer_iters, p.objective_tol);
            c = std::move(res.clustering);
            r.iterations = res.iterations;
        } else {
            RfkmParams pr = p;
            pr.seed = r.seed;
            RfkmResult res = rfkm_fit(d, k, pr);
            c = std::move(res.clustering);
            r.iterations = res.iterations;
        }
        r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        r.metrics = compute_metrics(d, c);
        r.objective = objective(d, c, p);  // same objective for every method
        results[t] = std::move(r);
    };

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    auto worker = [&] {
        for (;;) {
            const std::size_t t = next.fetch_add(1);
            if (t >= total) return;
            try {
                run_one(t);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::size_t n_workers = cfg.workers > 0 ? static_cast<std::size_t>(cfg.workers)
                                            : std::max(1u, std::thread::hardware_concurrency());
    n_workers = std::min(n_workers, total);
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    ExperimentReport report;
    report.dataset_path = cfg.dataset_path;
    report.n = d.rows;
    report.m = d.cols;
    report.k = k;
    report.restarts = cfg.restarts;
    report.base_seed = cfg.base_seed;
    report.lambda1 = p.lambda1;
    report.lambda2 = p.resolved_lambda2(d.rows);
    report.phi = p.phi;
    report.normalize = cfg.normalize;
    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
        std::vector<RunResult> runs(results.begin() + static_cast<std::ptrdiff_t>(mi * restarts),
                                    results.begin() +
                                        static_cast<std::ptrdiff_t>((mi + 1) * restarts));
        report.methods.push_back(summarize(cfg.methods[mi], std::move(runs)));
    }
    report.improvement_vs_km = improvements(report);
    return report;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    return run_experiment(cfg, load_dataset(cfg));
}

std::vector<ExperimentReport> lambda1_sweep_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.lambda1_sweep.empty())
        throw ConfigError("config: key \"lambda1_sweep\" is required for a sweep");
    const Dataset d = load_dataset(cfg);
    std::vector<ExperimentReport> reports;
    reports.reserve(cfg.lambda1_sweep.size());
    for (double lambda1 : cfg.lambda1_sweep) {
        ExperimentConfig step = cfg;
        step.params.lambda1 = lambda1;
        reports.push_back(run_experiment(step, d));
    }
    return reports;
}

std::string report_to_json(const ExperimentReport& report) {
    return report_json(report).dump(2) + "\n";
}

std::string reports_to_json(const std::vector<ExperimentReport>& reports) {
    ordered_json arr = ordered_json::array();
    for (const ExperimentReport& r : reports) arr.push_back(report_json(r));
    return arr.dump(2) + "\n";
}

std::string runs_to_csv(const std::vector<ExperimentReport>& reports) {
    std::ostringstream out;
    out << "lambda1,method,restart,seed,iterations,objective_term1,objective_term2,"
           "objective_term3,objective_total,avg,var_population,var_sample,jain,max,"
           "silhouette,purity\n";
    for (const ExperimentReport& report : reports) {
        for (const MethodSummary& s : report.methods) {
            for (const RunResult& r : s.runs) {
                out << format_double(r.lambda1) << ',' << method_name(r.method) << ','
                    << r.restart << ',' << r.seed.value << ',' << r.iterations << ','
                    << format_double(r.objective.term1) << ',' << format_double(r.objective.term2)
                    << ',' << format_double(r.objective.term3) << ','
                    << format_double(r.objective.total) << ',' << format_double(r.metrics.avg)
                    << ',' << format_double(r.metrics.var_population) << ','
                    << format_double(r.metrics.var_sample) << ',' << format_double(r.metrics.jain)
                    << ',' << format_double(r.metrics.max) << ','
                    << (r.metrics.silhouette ? format_double(*r.metrics.silhouette) : "") << ','
                    << (r.metrics.purity ? format_double(*r.metrics.purity) : "") << '\n';
            }
        }
    }
    return out.str();
}

std::string render_comparison(const ExperimentReport& report) {
    std::ostringstream out;
    out << report.dataset_path << "  n=" << report.n << " m=" << report.m << " k=" << report.k
        << "  restarts=" << report.restarts << " base_seed=" << report.base_seed
        << "\nlambda1=" << format_sig6(report.lambda1)
        << " lambda2=" << format_sig6(report.lambda2) << " phi=" << format_sig6(report.phi)
        << " normalize=" << (report.normalize ? "true" : "false") << "\n\n";

    const bool gains = !report.improvement_vs_km.empty();
    auto gain_of = [&](const char* key) -> const ImprovementRow* {
        for (const ImprovementRow& row : report.improvement_vs_km)
            if (row.metric == key) return &row;
        return nullptr;
    };

    char buf[64];
    out << "  metric";
    for (const MethodSummary& s : report.methods) {
        std::snprintf(buf, sizeof buf, "%12s", method_name(s.method).c_str());
        out << buf;
    }
    if (gains) out << "   rfkm gain";
    out << '\n';
    auto block = [&](const char* title, std::span<const MetricColumn> cols) {
        out << title << '\n';
        for (const MetricColumn& col : cols) {
            bool any = false;
            for (const MethodSummary& s : report.methods) any = any || col.pick(s).has_value();
            if (!any) continue;
            std::snprintf(buf, sizeof buf, "  %-6s", col.label);
            out << buf;
            for (const MethodSummary& s : report.methods) {
                const auto stats = col.pick(s);
                if (stats)
                    std::snprintf(buf, sizeof buf, "%12s", format_sig6(stats->mean).c_str());
                else
                    std::snprintf(buf, sizeof buf, "%12s", "-");
                out << buf;
            }
            if (gains) {
                if (const ImprovementRow* row = gain_of(col.key))
                    std::snprintf(buf, sizeof buf, "%10.2f%%", row->percent);
                else
                    std::snprintf(buf, sizeof buf, "%11s", "-");
                out << buf;
            }
            out << '\n';
        }
    };
    block("representativity fairness", kFairnessColumns);
    block("clustering quality", kQualityColumns);
    return out.str();
}

}  // namespace rfkm
