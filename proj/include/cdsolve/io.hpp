#pragma once

#include <cdsolve/sparse.hpp>

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cdsolve {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class MatrixFormat { MatrixMarket, DenseCsv, Libsvm };

std::optional<MatrixFormat> parse_matrix_format(const std::string& name);
// .mtx -> MatrixMarket, .svm / .libsvm -> Libsvm, anything else -> DenseCsv
MatrixFormat guess_matrix_format(const std::string& path);

// Matrix Market "coordinate" (real, integer or pattern; general or symmetric) or "array".
SparseColMatrix read_matrix_market(const std::string& path);
void write_matrix_market(const std::string& path, const SparseColMatrix& m);

// One row per line, entries separated by commas or blanks; '#' starts a comment.
SparseColMatrix read_dense_csv(const std::string& path);

// "label index:value ..." rows with 1-based feature indices.
struct LibsvmData {
    SparseColMatrix A;
    std::vector<double> labels;
};
LibsvmData read_libsvm(const std::string& path, std::optional<std::size_t> n_features = std::nullopt);

SparseColMatrix read_matrix(const std::string& path, std::optional<MatrixFormat> format = std::nullopt);

// Numbers separated by blanks, commas or newlines.
std::vector<double> read_vector(const std::string& path);
void write_vector(std::ostream& os, const std::vector<double>& v);
void write_vector(const std::string& path, const std::vector<double>& v);

}  // namespace cdsolve
