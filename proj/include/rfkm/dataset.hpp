#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rfkm {

// Raised when a file cannot be turned into a Dataset; the message names
// the offending row/column where one exists.
struct CsvError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Immutable after construction; safe to share across threads.
struct Dataset {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> features;              // rows x cols, row-major, all finite
    std::vector<std::string> labels;           // empty, or one class id per row
    std::vector<std::string> attribute_names;  // empty, or one name per column

    std::span<const double> row(std::size_t i) const {
        return {features.data() + i * cols, cols};
    }
    bool has_labels() const { return !labels.empty(); }
    std::size_t distinct_labels() const;
};

// Validating constructor; throws std::invalid_argument on any invariant
// violation (empty matrix, non-finite value, label length mismatch).
Dataset make_dataset(std::size_t rows, std::size_t cols, std::vector<double> features,
                     std::vector<std::string> labels = {},
                     std::vector<std::string> attribute_names = {});

// Reads a delimited text file with a mandatory header line. Every column
// except the optional label column must parse as a finite real with a
// decimal point (no locale-dependent formats).
Dataset load_csv(const std::string& path, const std::string& label_column = "",
                 char delimiter = ',');

// Inverse of load_csv: writes header plus rows, feature values formatted so
// they reload to bit-identical doubles.
void save_csv(const Dataset& d, const std::string& path, char delimiter = ',');

// Rescales each attribute to [0,1]; a constant attribute maps to 0.
Dataset normalize_min_max(const Dataset& d);

}  // namespace rfkm
