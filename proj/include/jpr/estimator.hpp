#pragma once

#include "jpr/data.hpp"
#include "jpr/lasso.hpp"
#include "jpr/pd3o.hpp"

#include <vector>

namespace jpr {

struct SolveDiagnostics {
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
    /// max_j |Omega_jj - 1/tau_j^2| of the solver output, before the diagonal
    /// is overwritten.
    double diagonal_deviation = 0.0;
    /// Largest off-diagonal magnitude set to zero by apply_prox_support.
    double zeroed_max = 0.0;
    double lipschitz = 0.0;
    double gamma = 0.0;
    double eta = 0.0;
};

/// Joint estimate. omega_hat has Omega_jj = 1 / tau_sq_j exactly; q_hat has a
/// diagonal of exactly -1.
struct JprEstimate {
    SymMatrix omega_hat;
    SymMatrix q_hat;
    Vector tau;
    Vector tau_sq;
    Vector lambdas;
    std::vector<LassoFit> stage1;
    SolveDiagnostics solve_diag;
};

struct FitOptions {
    bool center = true;
    bool standardize = false;
    LassoOptions lasso;
};

/// Column-wise precision entries from regression fits: M_jj = 1/tau_j^2,
/// M_{-j,j} = -theta_j / tau_j^2. Not symmetric in general.
/// Throws Error(DegenerateVariance) if some tau_j^2 is not positive.
Matrix regression_matrix(const std::vector<LassoFit>& stage1);

/// Zeroes the off-diagonal pairs (k, j), (j, k) where the penalty prox of the
/// final dual point (U + eta * Omega) / eta is zero in both entries. At a fixed
/// point Omega equals that prox, so this removes round-off from the projection
/// and leaves exact zeros. Returns the largest magnitude removed.
double apply_prox_support(Matrix& omega, const Matrix& u, double eta, const Vector& tau_sq,
                          const Vector& lambdas);

/// Feasible starting point: projection of the regression matrix onto the box.
SymMatrix init_omega(const std::vector<LassoFit>& stage1, double alpha = 0.0,
                     double beta = std::numeric_limits<double>::infinity());

/// Centering (optional), per-feature lasso, then the joint solve. config.lambdas
/// is replaced by the stage-1 selections when empty. Non-convergence is reported
/// in solve_diag, not thrown.
JprEstimate fit(const DataMatrix& x, const LambdaRule& rule, const SolverConfig& config = {},
                const FitOptions& options = {});

/// Q = -T Omega T with T = diag(tau).
SymMatrix partial_correlation_from(const SymMatrix& omega, const Vector& tau);

/// Stage-1-only baseline: (M + M^T) / 2 of the regression matrix, no PSD projection.
SymMatrix naive_symmetrized(const DataMatrix& x, const LambdaRule& rule,
                            const FitOptions& options = {});

/// ((1/n) X^T X)^{-1} of the (optionally centered) data. Requires n > p.
SymMatrix sample_inverse_covariance(const DataMatrix& x, bool center = true);

struct Edge {
    Eigen::Index j = 0;  // j < k, 0-based
    Eigen::Index k = 0;
    double weight = 0.0;
};

/// Pairs with |Q_jk| > threshold, by descending |weight| then (j, k).
std::vector<Edge> edges(const SymMatrix& q_hat, double threshold = 0.0);

/// Validated preprocessing shared by fit and naive_symmetrized.
DataMatrix prepare_data(const DataMatrix& x, const FitOptions& options);

}  // namespace jpr
