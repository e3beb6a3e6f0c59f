#include "jpr/lasso.hpp"

#include "jpr/error.hpp"
#include "jpr/parallel.hpp"
#include "jpr/rng.hpp"
#include "linalg.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>

namespace jpr {

namespace {

using detail::gram_of;
using detail::gram_without;
using detail::top_eigenvalue;

constexpr int kDefaultGridSize = 16;

// FISTA on the Gram form: minimize 0.5 b^T G b - c^T b + lambda ||b||_1 with
// coordinate `skip` pinned to zero (skip < 0 pins nothing).
struct GramLasso {
    Vector beta;
    int iterations = 0;
    bool converged = false;
};

GramLasso fista_gram(const Matrix& gram, const Vector& c, Eigen::Index skip, double lambda,
                     double lipschitz, double tol, int max_iter) {
    const Eigen::Index m = gram.rows();
    GramLasso out;
    out.beta = Vector::Zero(m);
    if (!(lipschitz > 0.0)) {
        out.converged = true;
        return out;
    }
    Vector y = Vector::Zero(m);
    Vector next(m);
    Vector grad(m);
    double t = 1.0;
    const double step = 1.0 / lipschitz;
    const double thresh = lambda * step;
    for (int k = 1; k <= max_iter; ++k) {
        grad.noalias() = gram * y;
        grad -= c;
        next = y - step * grad;
        next = next.array().sign() * (next.array().abs() - thresh).max(0.0);
        if (skip >= 0) next(skip) = 0.0;

        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        y = next + ((t - 1.0) / t_next) * (next - out.beta);
        const double diff = (next - out.beta).norm();
        out.beta.swap(next);
        t = t_next;
        out.iterations = k;

        if (!std::isfinite(diff)) {
            throw Error(ErrorKind::NonFinite, "lasso iterate diverged (non-finite step)");
        }
        if (diff <= tol) {
            out.converged = true;
            break;
        }
    }
    return out;
}

// Gram-form lipschitz constant for feature j: lambda_max(G without row/col j).
double feature_lipschitz(const Matrix& gram, Eigen::Index j) {
    return top_eigenvalue(gram_without(gram, j));
}

// Compress a full-length coefficient vector (zero at j) into the p - 1 layout.
Vector compress(const Vector& beta, Eigen::Index j) {
    const Eigen::Index p = beta.size();
    Vector theta(p - 1);
    theta.head(j) = beta.head(j);
    theta.tail(p - 1 - j) = beta.tail(p - 1 - j);
    return theta;
}

std::vector<double> lambda_grid_from_gram(const Matrix& gram, Eigen::Index j) {
    double lmax = 0.0;
    for (Eigen::Index k = 0; k < gram.rows(); ++k)
        if (k != j) lmax = std::max(lmax, std::abs(gram(k, j)));
    std::vector<double> grid(kDefaultGridSize);
    for (int i = 0; i < kDefaultGridSize; ++i) {
        const double frac = static_cast<double>(i) / (kDefaultGridSize - 1);
        grid[i] = lmax * std::pow(0.01, frac);
    }
    return grid;
}

std::vector<double> sorted_descending(std::vector<double> grid) {
    std::sort(grid.begin(), grid.end(), std::greater<>());
    return grid;
}

// Per-fold training Gram matrices and held-out rows, shared across features.
class CvWorkspace {
public:
    CvWorkspace(const Matrix& x, int folds, std::uint64_t seed) : folds_(folds) {
        const auto assignment = cv_fold_assignment(x.rows(), folds, seed);
        train_gram_.resize(folds);
        test_rows_.resize(folds);
        lipschitz_.assign(folds, std::vector<double>(x.cols(), -1.0));
        for (int f = 0; f < folds; ++f) {
            std::vector<Eigen::Index> train;
            for (Eigen::Index i = 0; i < x.rows(); ++i)
                (assignment[i] == f ? test_rows_[f] : train).push_back(i);
            train_gram_[f] = gram_of(x(train, Eigen::all));
        }
        for (int f = 0; f < folds; ++f)
            for (Eigen::Index j = 0; j < x.cols(); ++j)
                lipschitz_[f][j] = feature_lipschitz(train_gram_[f], j);
    }

    int folds() const { return folds_; }
    const Matrix& gram(int f) const { return train_gram_[f]; }
    const std::vector<Eigen::Index>& test_rows(int f) const { return test_rows_[f]; }
    double lipschitz(int f, Eigen::Index j) const { return lipschitz_[f][j]; }

private:
    int folds_;
    std::vector<Matrix> train_gram_;
    std::vector<std::vector<Eigen::Index>> test_rows_;
    std::vector<std::vector<double>> lipschitz_;
};

struct FeatureContext {
    const DataMatrix& data;
    const LambdaRule& rule;
    const LassoOptions& opts;
    Matrix gram;
    std::vector<double> lipschitz;
    std::optional<CvWorkspace> cv;
};

double cv_select(const FeatureContext& ctx, Eigen::Index j, const std::vector<double>& grid) {
    const Matrix& x = ctx.data.values();
    const CvWorkspace& cv = *ctx.cv;
    double best_lambda = grid.front();
    double best_err = std::numeric_limits<double>::infinity();
    for (double lambda : grid) {
        double err = 0.0;
        for (int f = 0; f < cv.folds(); ++f) {
            const Matrix& g = cv.gram(f);
            const Vector c = g.col(j);
            auto fit = fista_gram(g, c, j, lambda, cv.lipschitz(f, j), ctx.opts.tol,
                                  ctx.opts.max_iter);
            const auto& rows = cv.test_rows(f);
            const Vector resid = x(rows, j) - x(rows, Eigen::all) * fit.beta;
            err += resid.squaredNorm() / static_cast<double>(rows.size());
        }
        err /= cv.folds();
        if (err < best_err) {
            best_err = err;
            best_lambda = lambda;
        }
    }
    return best_lambda;
}

double ic_select(const FeatureContext& ctx, Eigen::Index j, const std::vector<double>& grid,
                 InfoCriterion criterion) {
    const Matrix& x = ctx.data.values();
    const double n = static_cast<double>(x.rows());
    const double penalty = criterion == InfoCriterion::Aic ? 2.0 : std::log(n);
    const Vector c = ctx.gram.col(j);
    double best_lambda = grid.front();
    double best_score = std::numeric_limits<double>::infinity();
    for (double lambda : grid) {
        auto fit = fista_gram(ctx.gram, c, j, lambda, ctx.lipschitz[j], ctx.opts.tol,
                              ctx.opts.max_iter);
        const double tau_sq = (x.col(j) - x * fit.beta).squaredNorm() / n;
        const double card = static_cast<double>((fit.beta.array() != 0.0).count());
        const double score = n * std::log(tau_sq) + penalty * card;
        if (score < best_score) {
            best_score = score;
            best_lambda = lambda;
        }
    }
    return best_lambda;
}

double select_for(const FeatureContext& ctx, Eigen::Index j) {
    const auto& x = ctx.data;
    return std::visit(
        [&](const auto& r) -> double {
            using R = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<R, FixedLambda>) {
                return r.value;
            } else if constexpr (std::is_same_v<R, TheoryLambda>) {
                return theory_lambda(r.c, static_cast<double>(x.p()), static_cast<double>(x.n()));
            } else if constexpr (std::is_same_v<R, CvLambda>) {
                auto grid = r.grid ? sorted_descending(*r.grid) : lambda_grid_from_gram(ctx.gram, j);
                return cv_select(ctx, j, grid);
            } else {
                auto grid = r.grid ? sorted_descending(*r.grid) : lambda_grid_from_gram(ctx.gram, j);
                return ic_select(ctx, j, grid, r.criterion);
            }
        },
        ctx.rule);
}

FeatureContext make_context(const DataMatrix& x, const LambdaRule& rule, const LassoOptions& opts) {
    validate(rule);
    if (x.n() < 2 || x.p() < 2) {
        throw Error(ErrorKind::Shape, "need n >= 2 and p >= 2");
    }
    if (!(opts.tol > 0.0) || opts.max_iter < 1) {
        throw Error(ErrorKind::InvalidArgument, "lasso tol must be > 0 and max_iter >= 1");
    }
    FeatureContext ctx{x, rule, opts, gram_of(x.values()), {}, std::nullopt};
    ctx.lipschitz.resize(x.p());
    for (Eigen::Index j = 0; j < x.p(); ++j) ctx.lipschitz[j] = feature_lipschitz(ctx.gram, j);
    if (const auto* cv = std::get_if<CvLambda>(&rule)) {
        if (cv->folds > x.n()) {
            throw Error(ErrorKind::InvalidArgument, "more folds than observations");
        }
        ctx.cv.emplace(x.values(), cv->folds, cv->seed);
    }
    return ctx;
}

void require_variance(const DataMatrix& x, Eigen::Index j) {
    const auto& v = x.values();
    if ((v.col(j).array() == v(0, j)).all()) {
        throw Error(ErrorKind::DegenerateFeature,
                    "feature " + x.feature_label(j) + " has zero variance");
    }
}

LassoFit fit_feature(const FeatureContext& ctx, Eigen::Index j) {
    const Matrix& x = ctx.data.values();
    LassoFit fit;
    fit.lambda = select_for(ctx, j);
    const Vector c = ctx.gram.col(j);
    auto sol = fista_gram(ctx.gram, c, j, fit.lambda, ctx.lipschitz[j], ctx.opts.tol,
                          ctx.opts.max_iter);
    fit.theta = compress(sol.beta, j);
    fit.iterations = sol.iterations;
    fit.converged = sol.converged;
    fit.tau_sq = residual_variance(x.col(j), drop_column(x, j), fit.theta);
    return fit;
}

Error annotate(Eigen::Index j, const std::exception_ptr& ep) {
    try {
        std::rethrow_exception(ep);
    } catch (const Error& e) {
        return Error(e.kind(), "feature " + std::to_string(j + 1) + ": " + e.what());
    } catch (const std::exception& e) {
        return Error(ErrorKind::InvalidArgument, "feature " + std::to_string(j + 1) + ": " + e.what());
    }
}

}  // namespace

double theory_lambda(double c, double p, double n) {
    return c * std::sqrt(std::log(p) / n);
}

void validate(const LambdaRule& rule) {
    auto check_grid = [](const std::optional<std::vector<double>>& grid) {
        if (!grid) return;
        if (grid->empty()) throw Error(ErrorKind::EmptyGrid, "lambda grid is empty");
        for (double v : *grid)
            if (!(v >= 0.0) || !std::isfinite(v))
                throw Error(ErrorKind::InvalidArgument, "lambda grid values must be finite and >= 0");
    };
    std::visit(
        [&](const auto& r) {
            using R = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<R, FixedLambda>) {
                if (!(r.value >= 0.0) || !std::isfinite(r.value))
                    throw Error(ErrorKind::InvalidArgument, "lambda must be finite and >= 0");
            } else if constexpr (std::is_same_v<R, TheoryLambda>) {
                if (!(r.c >= 0.0) || !std::isfinite(r.c))
                    throw Error(ErrorKind::InvalidArgument, "lambda constant c must be >= 0");
            } else if constexpr (std::is_same_v<R, CvLambda>) {
                check_grid(r.grid);
                if (r.folds < 2) throw Error(ErrorKind::InvalidArgument, "cv needs at least 2 folds");
            } else {
                check_grid(r.grid);
            }
        },
        rule);
}

LassoFit fista_lasso(const Matrix& x_rest, const Vector& y, double lambda, double tol,
                     int max_iter) {
    if (x_rest.rows() != y.size()) {
        throw Error(ErrorKind::Shape, "design and response row counts differ");
    }
    if (!x_rest.allFinite() || !y.allFinite()) {
        throw Error(ErrorKind::NonFinite, "lasso inputs contain NaN or Inf");
    }
    if (!(lambda >= 0.0)) throw Error(ErrorKind::InvalidArgument, "lambda must be >= 0");
    const Matrix gram = gram_of(x_rest);
    const Vector c = x_rest.transpose() * y / static_cast<double>(x_rest.rows());
    auto sol = fista_gram(gram, c, -1, lambda, top_eigenvalue(gram), tol, max_iter);
    LassoFit fit;
    fit.theta = std::move(sol.beta);
    fit.lambda = lambda;
    fit.iterations = sol.iterations;
    fit.converged = sol.converged;
    return fit;
}

double residual_variance(const Vector& y, const Matrix& x_rest, const Vector& theta) {
    return (y - x_rest * theta).squaredNorm() / static_cast<double>(y.size());
}

Matrix drop_column(const Matrix& x, Eigen::Index j) {
    Matrix out(x.rows(), x.cols() - 1);
    out.leftCols(j) = x.leftCols(j);
    out.rightCols(x.cols() - 1 - j) = x.rightCols(x.cols() - 1 - j);
    return out;
}

std::vector<int> cv_fold_assignment(Eigen::Index n, int folds, std::uint64_t seed) {
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    Rng rng(seed);
    for (Eigen::Index i = n - 1; i > 0; --i) {
        const auto k = static_cast<Eigen::Index>(rng.uniform_int(0, static_cast<std::uint64_t>(i)));
        std::swap(perm[i], perm[k]);
    }
    std::vector<int> fold(static_cast<std::size_t>(n));
    for (Eigen::Index pos = 0; pos < n; ++pos) fold[perm[pos]] = static_cast<int>(pos * folds / n);
    return fold;
}

std::vector<double> default_lambda_grid(const DataMatrix& x, Eigen::Index j) {
    return lambda_grid_from_gram(gram_of(x.values()), j);
}

double select_lambda(const DataMatrix& x, Eigen::Index j, const LambdaRule& rule,
                     const LassoOptions& opts) {
    if (j < 0 || j >= x.p()) throw Error(ErrorKind::InvalidArgument, "feature index out of range");
    const auto ctx = make_context(x, rule, opts);
    require_variance(x, j);
    return select_for(ctx, j);
}

std::vector<LassoFit> fit_all_features(const DataMatrix& x, const LambdaRule& rule,
                                       const LassoOptions& opts) {
    const Eigen::Index p = x.p();
    for (Eigen::Index j = 0; j < p; ++j) require_variance(x, j);
    const auto ctx = make_context(x, rule, opts);
    std::vector<LassoFit> fits(static_cast<std::size_t>(p));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(p));

#pragma omp parallel for schedule(dynamic) num_threads(worker_threads())
    for (Eigen::Index j = 0; j < p; ++j) {
        try {
            fits[j] = fit_feature(ctx, j);
        } catch (...) {
            errors[j] = std::current_exception();
        }
    }

    for (Eigen::Index j = 0; j < p; ++j)
        if (errors[j]) throw annotate(j, errors[j]);
    return fits;
}

std::vector<LassoFit> fit_all_features_serial(const DataMatrix& x, const LambdaRule& rule,
                                              const LassoOptions& opts) {
    const Eigen::Index p = x.p();
    for (Eigen::Index j = 0; j < p; ++j) require_variance(x, j);
    const auto ctx = make_context(x, rule, opts);
    std::vector<LassoFit> fits;
    fits.reserve(static_cast<std::size_t>(p));
    for (Eigen::Index j = 0; j < p; ++j) {
        try {
            fits.push_back(fit_feature(ctx, j));
        } catch (...) {
            throw annotate(j, std::current_exception());
        }
    }
    return fits;
}

}  // namespace jpr
