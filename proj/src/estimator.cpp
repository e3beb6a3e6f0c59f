#include "jpr/estimator.hpp"

#include "jpr/error.hpp"
#include "linalg.hpp"

#include <algorithm>
#include <cmath>

namespace jpr {

namespace {

Vector tau_sq_of(const std::vector<LassoFit>& stage1) {
    Vector t(static_cast<Eigen::Index>(stage1.size()));
    for (std::size_t j = 0; j < stage1.size(); ++j) t(static_cast<Eigen::Index>(j)) = stage1[j].tau_sq;
    return t;
}

// Residual variances this small relative to the feature's own variance mean
// the feature is an exact linear combination of the others.
void require_positive_variance(const DataMatrix& x, const std::vector<LassoFit>& stage1) {
    const double n = static_cast<double>(x.n());
    for (Eigen::Index j = 0; j < x.p(); ++j) {
        const double scale = x.values().col(j).squaredNorm() / n;
        if (!(stage1[j].tau_sq > 1e-14 * scale)) {
            throw Error(ErrorKind::DegenerateVariance,
                        "feature " + x.feature_label(j) +
                            " is (numerically) a linear combination of the others: tau^2 = " +
                            std::to_string(stage1[j].tau_sq));
        }
    }
}

}  // namespace

DataMatrix prepare_data(const DataMatrix& x, const FitOptions& options) {
    if (x.n() < 2 || x.p() < 2) {
        throw Error(ErrorKind::Shape, "need n >= 2 and p >= 2, got " + std::to_string(x.n()) + "x" +
                                          std::to_string(x.p()));
    }
    if (const auto zero = zero_variance_columns(x); !zero.empty()) {
        throw Error(ErrorKind::DegenerateFeature,
                    "feature " + x.feature_label(zero.front()) + " has zero variance");
    }
    DataMatrix out = options.center ? center_columns(x) : x;
    if (options.standardize) out = standardize_columns(out);
    return out;
}

Matrix regression_matrix(const std::vector<LassoFit>& stage1) {
    const auto p = static_cast<Eigen::Index>(stage1.size());
    Matrix m(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const LassoFit& fit = stage1[j];
        if (!(fit.tau_sq > 0.0)) {
            throw Error(ErrorKind::DegenerateVariance,
                        "feature " + std::to_string(j + 1) + " has zero residual variance");
        }
        if (fit.theta.size() != p - 1) throw Error(ErrorKind::Shape, "theta must have length p - 1");
        m(j, j) = 1.0 / fit.tau_sq;
        for (Eigen::Index k = 0; k < p - 1; ++k) {
            const Eigen::Index row = k < j ? k : k + 1;
            m(row, j) = -fit.theta(k) / fit.tau_sq;
        }
    }
    return m;
}

double apply_prox_support(Matrix& omega, const Matrix& u, double eta, const Vector& tau_sq,
                          const Vector& lambdas) {
    const Matrix prox = prox_g_over_eta(u + eta * omega, eta, tau_sq, lambdas);
    double zeroed = 0.0;
    for (Eigen::Index j = 0; j < omega.cols(); ++j) {
        for (Eigen::Index k = j + 1; k < omega.rows(); ++k) {
            if (prox(k, j) == 0.0 && prox(j, k) == 0.0) {
                zeroed = std::max(zeroed, std::max(std::abs(omega(k, j)), std::abs(omega(j, k))));
                omega(k, j) = omega(j, k) = 0.0;
            }
        }
    }
    return zeroed;
}

SymMatrix init_omega(const std::vector<LassoFit>& stage1, double alpha, double beta) {
    return project_spectral_box(regression_matrix(stage1), alpha, beta);
}

JprEstimate fit(const DataMatrix& x, const LambdaRule& rule, const SolverConfig& config,
                const FitOptions& options) {
    const DataMatrix data = prepare_data(x, options);
    const Eigen::Index p = data.p();

    JprEstimate est;
    est.stage1 = fit_all_features(data, rule, options.lasso);
    require_positive_variance(data, est.stage1);
    est.tau_sq = tau_sq_of(est.stage1);
    est.tau = est.tau_sq.cwiseSqrt();

    SolverConfig cfg = config;
    if (cfg.lambdas.size() == 0) {
        cfg.lambdas.resize(p);
        for (Eigen::Index j = 0; j < p; ++j) cfg.lambdas(j) = est.stage1[j].lambda;
    }
    est.lambdas = cfg.lambdas;

    const Pd3oSolver solver(data, est.tau_sq, cfg);
    auto sol = solver.solve(init_omega(est.stage1, cfg.alpha, cfg.beta));

    Matrix omega = sol.omega.values();
    est.solve_diag.zeroed_max = apply_prox_support(omega, sol.u, sol.eta, est.tau_sq, cfg.lambdas);
    double deviation = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
        const double target = 1.0 / est.tau_sq(j);
        deviation = std::max(deviation, std::abs(omega(j, j) - target));
        omega(j, j) = target;
    }
    est.omega_hat = SymMatrix(std::move(omega));

    Matrix q = partial_correlation_from(est.omega_hat, est.tau).values();
    // tau_j * tau_j / tau_j^2 is 1 only up to rounding; the diagonal is -1 by construction.
    q.diagonal().setConstant(-1.0);
    est.q_hat = SymMatrix(std::move(q));

    est.solve_diag.iterations = sol.iterations;
    est.solve_diag.residual = sol.residual;
    est.solve_diag.converged = sol.converged;
    est.solve_diag.diagonal_deviation = deviation;
    est.solve_diag.lipschitz = sol.lipschitz;
    est.solve_diag.gamma = sol.gamma;
    est.solve_diag.eta = sol.eta;
    return est;
}

SymMatrix partial_correlation_from(const SymMatrix& omega, const Vector& tau) {
    if (tau.size() != omega.size()) throw Error(ErrorKind::Shape, "tau length must equal p");
    if (!(tau.array() > 0.0).all()) throw Error(ErrorKind::InvalidArgument, "tau must be positive");
    Matrix q = -(tau.asDiagonal() * omega.values() * tau.asDiagonal());
    return SymMatrix::symmetrize(q);
}

SymMatrix naive_symmetrized(const DataMatrix& x, const LambdaRule& rule, const FitOptions& options) {
    const DataMatrix data = prepare_data(x, options);
    const auto stage1 = fit_all_features(data, rule, options.lasso);
    require_positive_variance(data, stage1);
    return SymMatrix::symmetrize(regression_matrix(stage1));
}

SymMatrix sample_inverse_covariance(const DataMatrix& x, bool center) {
    if (x.n() <= x.p()) {
        throw Error(ErrorKind::Shape, "sample covariance is singular when n <= p");
    }
    const DataMatrix data = center ? center_columns(x) : x;
    const Matrix cov = detail::gram_of(data.values());
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) {
        throw Error(ErrorKind::NotPositiveDefinite, "sample covariance is not positive definite");
    }
    return SymMatrix::symmetrize(llt.solve(Matrix::Identity(x.p(), x.p())));
}

std::vector<Edge> edges(const SymMatrix& q_hat, double threshold) {
    std::vector<Edge> out;
    const Eigen::Index p = q_hat.size();
    for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index k = j + 1; k < p; ++k)
            if (std::abs(q_hat(j, k)) > threshold) out.push_back({j, k, q_hat(j, k)});
    std::stable_sort(out.begin(), out.end(), [](const Edge& a, const Edge& b) {
        const double wa = std::abs(a.weight);
        const double wb = std::abs(b.weight);
        if (wa != wb) return wa > wb;
        return a.j != b.j ? a.j < b.j : a.k < b.k;
    });
    return out;
}

}  // namespace jpr
