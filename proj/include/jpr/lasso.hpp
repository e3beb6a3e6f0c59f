#pragma once

#include "jpr/data.hpp"

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

namespace jpr {

/// Result of one per-feature lasso regression.
///
/// theta has length p - 1. Entry k refers to original feature k when k < j and
/// to feature k + 1 when k >= j, where j is the regressed feature.
struct LassoFit {
    Vector theta;
    double tau_sq = 0.0;
    double lambda = 0.0;
    int iterations = 0;
    bool converged = false;

    Eigen::Index support_size() const { return (theta.array() != 0.0).count(); }
};

struct FixedLambda {
    double value = 0.0;
};

/// lambda = c * sqrt(log(p) / n).
struct TheoryLambda {
    double c = 1.0;
};

/// K-fold cross-validation on held-out squared prediction error. Without an
/// explicit grid, 16 log-spaced values spanning [0.01, 1] * max_k |X_k^T X_j / n|
/// are used per feature.
struct CvLambda {
    std::optional<std::vector<double>> grid;
    int folds = 5;
    std::uint64_t seed = 0;
};

enum class InfoCriterion { Aic, Bic };

/// Minimizes n * log(tau^2(lambda)) + penalty * card(theta(lambda)),
/// penalty = 2 (AIC) or log(n) (BIC).
struct IcLambda {
    std::optional<std::vector<double>> grid;
    InfoCriterion criterion = InfoCriterion::Bic;
};

using LambdaRule = std::variant<FixedLambda, TheoryLambda, CvLambda, IcLambda>;

/// c * sqrt(log(p) / n); p and n are real so the formula can be checked on its own.
double theory_lambda(double c, double p, double n);

/// Throws Error(InvalidArgument) or Error(EmptyGrid) for malformed rules.
void validate(const LambdaRule& rule);

struct LassoOptions {
    double tol = 1e-6;
    int max_iter = 1000;
};

/// FISTA for (1/2n)||y - X_rest theta||^2 + lambda ||theta||_1 with step 1/L,
/// L = lambda_max(X_rest^T X_rest) / n. Stops when the iterate difference has
/// Euclidean norm <= tol; otherwise returns the last iterate with converged = false.
/// Only theta/lambda/iterations/converged are filled. Throws Error(NonFinite).
LassoFit fista_lasso(const Matrix& x_rest, const Vector& y, double lambda,
                     double tol = 1e-6, int max_iter = 1000);

/// (1/n) ||y - X_rest theta||^2
double residual_variance(const Vector& y, const Matrix& x_rest, const Vector& theta);

/// X without column j.
Matrix drop_column(const Matrix& x, Eigen::Index j);

/// Row -> fold map: seeded shuffle of the rows, then `folds` contiguous blocks.
std::vector<int> cv_fold_assignment(Eigen::Index n, int folds, std::uint64_t seed);

/// Default grid for feature j (descending).
std::vector<double> default_lambda_grid(const DataMatrix& x, Eigen::Index j);

double select_lambda(const DataMatrix& x, Eigen::Index j, const LambdaRule& rule,
                     const LassoOptions& opts = {});

/// Lasso of every column on the remaining columns, in parallel over features.
std::vector<LassoFit> fit_all_features(const DataMatrix& x, const LambdaRule& rule,
                                       const LassoOptions& opts = {});

/// Single-threaded reference for fit_all_features; results are identical.
std::vector<LassoFit> fit_all_features_serial(const DataMatrix& x, const LambdaRule& rule,
                                              const LassoOptions& opts = {});

}  // namespace jpr
