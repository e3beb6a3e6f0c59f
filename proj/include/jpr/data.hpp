#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace jpr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Observation matrix: rows are samples, columns are features.
///
/// Immutable after construction. Entries are checked finite on construction.
/// Size requirements beyond non-emptiness (n >= 2, p >= 2) are enforced by the
/// consumers that need them (CSV ingestion and estimation), so that a single
/// sampled row can still be represented.
class DataMatrix {
public:
    explicit DataMatrix(Matrix values, std::vector<std::string> feature_names = {},
                        bool centered = false);

    const Matrix& values() const noexcept { return values_; }
    Eigen::Index n() const noexcept { return values_.rows(); }
    Eigen::Index p() const noexcept { return values_.cols(); }
    const std::vector<std::string>& feature_names() const noexcept { return names_; }
    bool has_names() const noexcept { return !names_.empty(); }
    bool centered() const noexcept { return centered_; }

    /// Name of feature j, or its 1-based index when the matrix carries no names.
    std::string feature_label(Eigen::Index j) const;

private:
    Matrix values_;
    std::vector<std::string> names_;
    bool centered_;
};

/// Dense symmetric p x p matrix (precision, covariance, partial correlation).
class SymMatrix {
public:
    SymMatrix() = default;
    /// Throws Error(Shape) if not square or asymmetric beyond 1e-10 * max|M|.
    explicit SymMatrix(Matrix values);

    /// Copies the symmetric part (M + M^T) / 2 without checking.
    static SymMatrix symmetrize(const Matrix& m);
    static SymMatrix identity(Eigen::Index p);

    const Matrix& values() const noexcept { return values_; }
    Eigen::Index size() const noexcept { return values_.rows(); }
    double operator()(Eigen::Index j, Eigen::Index k) const { return values_(j, k); }

private:
    Matrix values_;
};

/// Reads a comma-separated numeric file. Throws Error(Io), ParseError, or
/// Error(Shape) for ragged rows and n < 2 / p < 2.
DataMatrix load_csv(const std::filesystem::path& path, bool has_header);

/// True when the first line of the file contains a field that is not a number.
bool csv_has_header(const std::filesystem::path& path);

/// Writes values with 17 significant digits; the header row is emitted only if
/// the matrix carries feature names.
void write_csv(const std::filesystem::path& path, const DataMatrix& x);

/// p x p matrix CSV: no header, 17 significant digits.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_csv(const std::filesystem::path& path);

DataMatrix center_columns(const DataMatrix& x);

/// Scales each column to unit (1/n) variance. Zero-variance columns are left
/// as they are so the estimator can report them.
DataMatrix standardize_columns(const DataMatrix& x);

/// Indices of columns whose sample variance is exactly zero.
std::vector<Eigen::Index> zero_variance_columns(const DataMatrix& x);

}  // namespace jpr
