#include "jpr/data.hpp"

#include "jpr/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace jpr {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Io: return "io";
        case ErrorKind::Parse: return "parse";
        case ErrorKind::Shape: return "shape";
        case ErrorKind::InvalidArgument: return "invalid-argument";
        case ErrorKind::DegenerateFeature: return "degenerate-feature";
        case ErrorKind::DegenerateVariance: return "degenerate-variance";
        case ErrorKind::NonFinite: return "non-finite";
        case ErrorKind::EigenFailure: return "eigen-failure";
        case ErrorKind::EmptyGrid: return "empty-grid";
        case ErrorKind::InfeasibleDegree: return "infeasible-degree";
        case ErrorKind::NotPositiveDefinite: return "not-positive-definite";
    }
    return "unknown";
}

DataMatrix::DataMatrix(Matrix values, std::vector<std::string> feature_names, bool centered)
    : values_(std::move(values)), names_(std::move(feature_names)), centered_(centered) {
    if (values_.rows() < 1 || values_.cols() < 1) {
        throw Error(ErrorKind::Shape, "data matrix is empty");
    }
    if (!names_.empty() && static_cast<Eigen::Index>(names_.size()) != values_.cols()) {
        throw Error(ErrorKind::Shape, "feature name count " + std::to_string(names_.size()) +
                                          " does not match column count " +
                                          std::to_string(values_.cols()));
    }
    if (!values_.allFinite()) {
        throw Error(ErrorKind::NonFinite, "data matrix contains NaN or Inf");
    }
}

std::string DataMatrix::feature_label(Eigen::Index j) const {
    if (has_names()) return names_[static_cast<std::size_t>(j)];
    return std::to_string(j + 1);
}

SymMatrix::SymMatrix(Matrix values) : values_(std::move(values)) {
    if (values_.rows() != values_.cols()) {
        throw Error(ErrorKind::Shape, "symmetric matrix must be square");
    }
    const double scale = values_.size() ? values_.cwiseAbs().maxCoeff() : 0.0;
    const double asym = values_.size() ? (values_ - values_.transpose()).cwiseAbs().maxCoeff() : 0.0;
    if (!(asym <= 1e-10 * scale)) {
        throw Error(ErrorKind::Shape, "matrix is not symmetric (max asymmetry " +
                                          std::to_string(asym) + ")");
    }
}

SymMatrix SymMatrix::symmetrize(const Matrix& m) {
    SymMatrix s;
    s.values_ = 0.5 * (m + m.transpose());
    return s;
}

SymMatrix SymMatrix::identity(Eigen::Index p) {
    SymMatrix s;
    s.values_ = Matrix::Identity(p, p);
    return s;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string::size_type start = 0;
    while (true) {
        auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

std::string trim(std::string s) {
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::optional<double> parse_real(const std::string& field) {
    const std::string t = trim(field);
    if (t.empty()) return std::nullopt;
    double v = 0.0;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        lines.push_back(std::move(line));
    }
    if (in.bad()) throw Error(ErrorKind::Io, "read failure on " + path.string());
    return lines;
}

std::string format_real(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace

bool csv_has_header(const std::filesystem::path& path) {
    auto lines = read_lines(path);
    if (lines.empty()) return false;
    for (const auto& f : split_fields(lines.front())) {
        if (!parse_real(f)) return true;
    }
    return false;
}

DataMatrix load_csv(const std::filesystem::path& path, bool has_header) {
    auto lines = read_lines(path);
    std::vector<std::string> names;
    std::size_t first_data = 0;
    if (has_header) {
        if (lines.empty()) throw Error(ErrorKind::Shape, "file has no header row");
        for (auto& f : split_fields(lines.front())) names.push_back(trim(f));
        first_data = 1;
    }

    const std::size_t n = lines.size() - first_data;
    std::size_t p = names.size();
    std::vector<std::vector<double>> rows;
    rows.reserve(n);
    for (std::size_t i = first_data; i < lines.size(); ++i) {
        auto fields = split_fields(lines[i]);
        if (p == 0) p = fields.size();
        if (fields.size() != p) {
            throw Error(ErrorKind::Shape, "row " + std::to_string(i + 1) + " has " +
                                              std::to_string(fields.size()) +
                                              " fields, expected " + std::to_string(p));
        }
        std::vector<double> row(p);
        for (std::size_t k = 0; k < p; ++k) {
            auto v = parse_real(fields[k]);
            if (!v) {
                throw ParseError(i + 1, k + 1,
                                 fields[k].empty() ? "missing field"
                                                   : "not a finite number: '" + fields[k] + "'");
            }
            row[k] = *v;
        }
        rows.push_back(std::move(row));
    }

    if (n < 2 || p < 2) {
        throw Error(ErrorKind::Shape, "need at least 2 rows and 2 columns, got " +
                                          std::to_string(n) + "x" + std::to_string(p));
    }
    Matrix values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < p; ++k)
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    return DataMatrix(std::move(values), std::move(names), false);
}

void write_csv(const std::filesystem::path& path, const DataMatrix& x) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    if (x.has_names()) {
        for (Eigen::Index k = 0; k < x.p(); ++k) out << (k ? "," : "") << x.feature_names()[k];
        out << '\n';
    }
    const Matrix& v = x.values();
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
        for (Eigen::Index k = 0; k < v.cols(); ++k) out << (k ? "," : "") << format_real(v(i, k));
        out << '\n';
    }
    if (!out) throw Error(ErrorKind::Io, "write failure on " + path.string());
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index k = 0; k < m.cols(); ++k) out << (k ? "," : "") << format_real(m(i, k));
        out << '\n';
    }
    if (!out) throw Error(ErrorKind::Io, "write failure on " + path.string());
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
    return load_csv(path, csv_has_header(path)).values();
}

DataMatrix center_columns(const DataMatrix& x) {
    Matrix v = x.values();
    for (Eigen::Index k = 0; k < v.cols(); ++k) {
        const double mean = v.col(k).mean();
        v.col(k).array() -= mean;
    }
    return DataMatrix(std::move(v), x.feature_names(), true);
}

DataMatrix standardize_columns(const DataMatrix& x) {
    Matrix v = x.values();
    const double n = static_cast<double>(v.rows());
    for (Eigen::Index k = 0; k < v.cols(); ++k) {
        const double mean = v.col(k).mean();
        const double sd = std::sqrt((v.col(k).array() - mean).square().sum() / n);
        if (sd > 0.0) v.col(k) /= sd;
    }
    return DataMatrix(std::move(v), x.feature_names(), x.centered());
}

std::vector<Eigen::Index> zero_variance_columns(const DataMatrix& x) {
    std::vector<Eigen::Index> out;
    const Matrix& v = x.values();
    for (Eigen::Index k = 0; k < v.cols(); ++k) {
        if ((v.col(k).array() == v(0, k)).all()) out.push_back(k);
    }
    return out;
}

}  // namespace jpr
