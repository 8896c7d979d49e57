#include "rfkm/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "rfkm/format.hpp"

namespace rfkm {

std::size_t Dataset::distinct_labels() const {
    return std::set<std::string>(labels.begin(), labels.end()).size();
}

Dataset make_dataset(std::size_t rows, std::size_t cols, std::vector<double> features,
                     std::vector<std::string> labels,
                     std::vector<std::string> attribute_names) {
    if (rows < 1 || cols < 1)
        throw std::invalid_argument("dataset: need at least one row and one column");
    if (features.size() != rows * cols)
        throw std::invalid_argument("dataset: feature buffer size does not match rows*cols");
    for (double v : features)
        if (!std::isfinite(v))
            throw std::invalid_argument("dataset: non-finite feature value");
    if (!labels.empty() && labels.size() != rows)
        throw std::invalid_argument("dataset: label count does not match row count");
    if (!attribute_names.empty() && attribute_names.size() != cols)
        throw std::invalid_argument("dataset: attribute name count does not match column count");
    Dataset d;
    d.rows = rows;
    d.cols = cols;
    d.features = std::move(features);
    d.labels = std::move(labels);
    d.attribute_names = std::move(attribute_names);
    return d;
}

namespace {

std::vector<std::string> split_line(const std::string& line, char delimiter) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, delimiter)) cells.push_back(cell);
    if (!line.empty() && line.back() == delimiter) cells.push_back("");
    return cells;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& raw, std::size_t line_no, const std::string& col_name) {
    const std::string cell = trim(raw);
    double value = 0.0;
    const char* first = cell.data();
    const char* last = first + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || !std::isfinite(value))
        throw CsvError("csv: cannot parse \"" + cell + "\" as a finite real at line " +
                       std::to_string(line_no) + ", column \"" + col_name + "\"");
    return value;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& label_column, char delimiter) {
    std::ifstream in(path);
    if (!in) throw CsvError("csv: cannot open \"" + path + "\"");

    std::string line;
    if (!std::getline(in, line)) throw CsvError("csv: \"" + path + "\" is empty");
    std::vector<std::string> header = split_line(line, delimiter);
    for (auto& h : header) h = trim(h);

    std::size_t label_idx = header.size();  // one past the end == no label column
    if (!label_column.empty()) {
        auto it = std::find(header.begin(), header.end(), label_column);
        if (it == header.end())
            throw CsvError("csv: label column \"" + label_column + "\" not found in header of \"" +
                           path + "\"");
        label_idx = static_cast<std::size_t>(it - header.begin());
    }
    if (header.size() < (label_idx < header.size() ? 2u : 1u))
        throw CsvError("csv: \"" + path + "\" has no feature columns");

    std::vector<std::string> names;
    for (std::size_t c = 0; c < header.size(); ++c)
        if (c != label_idx) names.push_back(header[c]);

    std::vector<double> features;
    std::vector<std::string> labels;
    std::size_t rows = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> cells = split_line(line, delimiter);
        if (cells.size() != header.size())
            throw CsvError("csv: line " + std::to_string(line_no) + " has " +
                           std::to_string(cells.size()) + " cells, header has " +
                           std::to_string(header.size()));
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c == label_idx)
                labels.push_back(trim(cells[c]));
            else
                features.push_back(parse_cell(cells[c], line_no, header[c]));
        }
        ++rows;
    }
    if (rows == 0) throw CsvError("csv: \"" + path + "\" has a header but no data rows");

    const std::size_t cols = names.size();
    try {
        return make_dataset(rows, cols, std::move(features),
                            label_idx < header.size() ? std::move(labels)
                                                      : std::vector<std::string>{},
                            std::move(names));
    } catch (const std::invalid_argument& e) {
        throw CsvError(std::string("csv: \"") + path + "\": " + e.what());
    }
}

void save_csv(const Dataset& d, const std::string& path, char delimiter) {
    std::ofstream out(path);
    if (!out) throw CsvError("csv: cannot write \"" + path + "\"");
    for (std::size_t c = 0; c < d.cols; ++c) {
        if (c) out << delimiter;
        out << (d.attribute_names.empty() ? "a" + std::to_string(c) : d.attribute_names[c]);
    }
    if (d.has_labels()) out << delimiter << "label";
    out << '\n';
    for (std::size_t i = 0; i < d.rows; ++i) {
        for (std::size_t c = 0; c < d.cols; ++c) {
            if (c) out << delimiter;
            out << format_double(d.features[i * d.cols + c]);
        }
        if (d.has_labels()) out << delimiter << d.labels[i];
        out << '\n';
    }
    if (!out) throw CsvError("csv: write to \"" + path + "\" failed");
}

Dataset normalize_min_max(const Dataset& d) {
    Dataset out = d;
    for (std::size_t c = 0; c < d.cols; ++c) {
        double lo = d.features[c];
        double hi = d.features[c];
        for (std::size_t i = 1; i < d.rows; ++i) {
            lo = std::min(lo, d.features[i * d.cols + c]);
            hi = std::max(hi, d.features[i * d.cols + c]);
        }
        const double range = hi - lo;
        for (std::size_t i = 0; i < d.rows; ++i) {
            double& v = out.features[i * d.cols + c];
            v = range > 0.0 ? (v - lo) / range : 0.0;
        }
    }
    return out;
}

}  // namespace rfkm
