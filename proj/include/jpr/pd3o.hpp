#pragma once

#include "jpr/data.hpp"

#include <limits>
#include <optional>

namespace jpr {

enum class LossKind { Quadratic, Huber };

/// Per-column regression loss l(z). Quadratic: (1/2n)||z||^2.
/// Huber: (1/n) sum phi_rho(z_i), quadratic on |z_i| <= rho and linear beyond.
struct Loss {
    LossKind kind = LossKind::Quadratic;
    double rho = 1.345;

    static Loss quadratic() { return {}; }
    static Loss huber(double rho = 1.345) { return {LossKind::Huber, rho}; }
};

/// Settings for the joint problem
///   minimize f(Omega) + g(Omega)  subject to  alpha I <= Omega <= beta I
/// with f the summed partial-regression losses and g the weighted l1 penalty
/// on off-diagonal columns plus the diagonal pinning Omega_jj = 1 / tau_j^2.
struct SolverConfig {
    Loss loss;
    double alpha = 0.0;
    double beta = std::numeric_limits<double>::infinity();
    /// Primal and dual step sizes; unset means gamma = 1/L and eta = 1/gamma.
    std::optional<double> gamma;
    std::optional<double> eta;
    double tol = 1e-8;
    int max_iter = 20000;
    /// One penalty per feature. Left empty, the estimator fills it from stage 1.
    Vector lambdas;
};

struct Pd3oState {
    SymMatrix omega;
    Matrix u;           // dual iterate, not symmetrized
    Matrix grad_cache;  // gradient of f at omega
    int iteration = 0;
};

struct JprSolveResult {
    SymMatrix omega;
    Matrix u;
    int iterations = 0;
    double residual = 0.0;  // max(||dOmega||_F, ||dU||_F) of the last step
    bool converged = false;
    double lipschitz = 0.0;
    double gamma = 0.0;
    double eta = 0.0;
};

/// Euclidean projection onto {S symmetric : alpha I <= S <= beta I}: clips the
/// eigenvalues of the symmetric part (A + A^T) / 2. Inputs whose symmetric part
/// is already feasible are returned unchanged. Throws Error(EigenFailure).
SymMatrix project_spectral_box(const Matrix& a, double alpha, double beta);

/// Gradient of the loss with respect to the residual vector z.
Vector loss_gradient(const Vector& z, const Loss& loss);

/// Value of the loss at z.
double loss_value(const Vector& z, const Loss& loss);

/// Gradient of f(Omega) = sum_j l(X_j + tau_j^2 X_{-j} Omega_{-j,j}).
/// Column j carries tau_j^2 X_{-j}^T grad l(.) off the diagonal and 0 on it.
/// Columns are computed in parallel.
Matrix grad_f(const Matrix& omega, const DataMatrix& x, const Vector& tau_sq, const Loss& loss);

/// Single-threaded reference for grad_f; results are identical.
Matrix grad_f_serial(const Matrix& omega, const DataMatrix& x, const Vector& tau_sq,
                     const Loss& loss);

/// max_j tau_j^4 lambda_max(X_{-j}^T X_{-j}) / n
double lipschitz_constant(const DataMatrix& x, const Vector& tau_sq);

/// Prox of g / eta evaluated at V / eta. Diagonal: 1 / tau_j^2. Off-diagonal
/// (k, j): soft-threshold of V_kj at tau_j^2 lambda_j, divided by eta.
Matrix prox_g_over_eta(const Matrix& v, double eta, const Vector& tau_sq, const Vector& lambdas);

/// f(Omega) + sum_j lambda_j tau_j^2 ||Omega_{-j,j}||_1 (diagonal excluded;
/// the diagonal constraint is handled by the caller).
double jpr_objective(const Matrix& omega, const DataMatrix& x, const Vector& tau_sq,
                     const SolverConfig& config);

/// Splitting solver bound to one problem instance. Caches X^T X / n for the
/// quadratic loss and the Lipschitz constant, and resolves step sizes.
class Pd3oSolver {
public:
    /// Throws Error(DegenerateVariance) for tau_sq <= 0, Error(InvalidArgument)
    /// for inconsistent configuration or step sizes outside gamma < 2/L, gamma*eta <= 1.
    Pd3oSolver(const DataMatrix& x, Vector tau_sq, SolverConfig config);

    double lipschitz() const noexcept { return lipschitz_; }
    double gamma() const noexcept { return gamma_; }
    double eta() const noexcept { return eta_; }
    const SolverConfig& config() const noexcept { return config_; }
    const Vector& tau_sq() const noexcept { return tau_sq_; }

    Pd3oState initial_state(const SymMatrix& omega0) const;

    /// One primal-dual update. Returns max(||dOmega||_F, ||dU||_F).
    /// Throws Error(NonFinite) when the iterates blow up.
    double step(Pd3oState& state) const;

    JprSolveResult solve(const std::optional<SymMatrix>& omega0 = std::nullopt) const;

    Matrix gradient(const Matrix& omega) const;
    double objective(const Matrix& omega) const;

private:
    const DataMatrix& x_;
    Vector tau_sq_;
    SolverConfig config_;
    Matrix gram_;
    double lipschitz_ = 0.0;
    double gamma_ = 0.0;
    double eta_ = 0.0;
};

/// Stateless form of Pd3oSolver::step; resolves step sizes from config.
Pd3oState pd3o_step(const Pd3oState& state, const DataMatrix& x, const Vector& tau_sq,
                    const SolverConfig& config);

/// Runs the splitting iteration until the stationarity residual drops to
/// config.tol or config.max_iter steps. Without omega0 the start is the
/// projection of diag(1 / tau_sq); the dual start is zero.
JprSolveResult solve_jpr(const DataMatrix& x, const Vector& tau_sq, const SolverConfig& config,
                         const std::optional<SymMatrix>& omega0 = std::nullopt);

}  // namespace jpr
