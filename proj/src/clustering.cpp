#include "rfkm/clustering.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"

namespace rfkm {

std::vector<std::size_t> Clustering::cluster_sizes() const {
    std::vector<std::size_t> sizes(k, 0);
    for (int a : assignment) ++sizes[static_cast<std::size_t>(a)];
    return sizes;
}

void check_consistent(const Dataset& d, const Clustering& c) {
    if (c.k < 1) throw std::invalid_argument("clustering: k must be at least 1");
    if (c.cols != d.cols)
        throw std::invalid_argument("clustering: representative dimension " +
                                    std::to_string(c.cols) + " does not match dataset columns " +
                                    std::to_string(d.cols));
    if (c.assignment.size() != d.rows)
        throw std::invalid_argument("clustering: assignment length " +
                                    std::to_string(c.assignment.size()) +
                                    " does not match dataset rows " + std::to_string(d.rows));
    if (c.representatives.size() != c.k * c.cols)
        throw std::invalid_argument("clustering: representative matrix size mismatch");
    for (int a : c.assignment)
        if (a < 0 || static_cast<std::size_t>(a) >= c.k)
            throw std::invalid_argument("clustering: assignment index " + std::to_string(a) +
                                        " outside [0," + std::to_string(c.k) + ")");
    for (double v : c.representatives)
        if (!std::isfinite(v))
            throw std::invalid_argument("clustering: non-finite representative value");
}

std::string clustering_to_json(const Clustering& c) {
    nlohmann::ordered_json j;
    j["assignment"] = c.assignment;
    std::vector<std::vector<double>> reps;
    for (std::size_t i = 0; i < c.k; ++i) {
        auto r = c.representative(i);
        reps.emplace_back(r.begin(), r.end());
    }
    j["representatives"] = reps;
    return j.dump(2) + "\n";
}

void save_clustering_json(const Clustering& c, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("clustering: cannot write \"" + path + "\"");
    out << clustering_to_json(c);
    if (!out) throw std::runtime_error("clustering: write to \"" + path + "\" failed");
}

Clustering load_clustering_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("clustering: cannot open \"" + path + "\"");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("clustering: \"" + path + "\" is not valid JSON: " + e.what());
    }
    if (!j.contains("assignment") || !j.contains("representatives"))
        throw std::runtime_error("clustering: \"" + path +
                                 "\" needs \"assignment\" and \"representatives\" keys");
    Clustering c;
    c.assignment = j.at("assignment").get<std::vector<int>>();
    const auto reps = j.at("representatives").get<std::vector<std::vector<double>>>();
    if (reps.empty()) throw std::runtime_error("clustering: \"" + path + "\" has no representatives");
    c.k = reps.size();
    c.cols = reps.front().size();
    for (const auto& r : reps) {
        if (r.size() != c.cols)
            throw std::runtime_error("clustering: ragged representative rows in \"" + path + "\"");
        c.representatives.insert(c.representatives.end(), r.begin(), r.end());
    }
    return c;
}

}  // namespace rfkm
