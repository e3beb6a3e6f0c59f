#include "jpr/pd3o.hpp"

#include "jpr/error.hpp"
#include "jpr/parallel.hpp"
#include "linalg.hpp"

#include <cmath>
#include <string>

namespace jpr {

namespace {

// Column j of grad f. For the quadratic loss with a cached gram G = X^T X / n,
// tau_j^2 X_{-j}^T (X_j + tau_j^2 X_{-j} w) / n = tau_j^2 (G_j + tau_j^2 G w)
// restricted to rows k != j, where w is column j of omega with entry j zeroed.
void gradient_column(Eigen::Index j, const Matrix& omega, const Matrix& x, const Matrix* gram,
                     const Vector& tau_sq, const Loss& loss, Matrix& out) {
    const double t2 = tau_sq(j);
    Vector w = omega.col(j);
    w(j) = 0.0;
    if (loss.kind == LossKind::Quadratic && gram != nullptr) {
        out.col(j).noalias() = (*gram) * w;
        out.col(j) = t2 * (gram->col(j) + t2 * out.col(j));
    } else {
        Vector z = x.col(j);
        z.noalias() += t2 * (x * w);
        out.col(j).noalias() = t2 * (x.transpose() * loss_gradient(z, loss));
    }
    out(j, j) = 0.0;
}

Matrix gradient_parallel(const Matrix& omega, const Matrix& x, const Matrix* gram,
                         const Vector& tau_sq, const Loss& loss) {
    const Eigen::Index p = omega.cols();
    Matrix out(p, p);
#pragma omp parallel for schedule(static) num_threads(worker_threads())
    for (Eigen::Index j = 0; j < p; ++j) gradient_column(j, omega, x, gram, tau_sq, loss, out);
    return out;
}

Matrix gradient_serial(const Matrix& omega, const Matrix& x, const Matrix* gram,
                       const Vector& tau_sq, const Loss& loss) {
    const Eigen::Index p = omega.cols();
    Matrix out(p, p);
    for (Eigen::Index j = 0; j < p; ++j) gradient_column(j, omega, x, gram, tau_sq, loss, out);
    return out;
}

void check_shapes(const Matrix& omega, const DataMatrix& x, const Vector& tau_sq) {
    if (omega.rows() != x.p() || omega.cols() != x.p() || tau_sq.size() != x.p()) {
        throw Error(ErrorKind::Shape, "omega, data and tau_sq dimensions disagree");
    }
}

double soft_threshold(double v, double t) {
    const double mag = std::abs(v) - t;
    return mag > 0.0 ? std::copysign(mag, v) : 0.0;
}

void require_finite(const Pd3oState& s) {
    if (!std::isfinite(s.omega.values().norm()) || !std::isfinite(s.u.norm())) {
        throw Error(ErrorKind::NonFinite,
                    "iterates diverged at step " + std::to_string(s.iteration) +
                        " (check step sizes)");
    }
}

}  // namespace

SymMatrix project_spectral_box(const Matrix& a, double alpha, double beta) {
    if (a.rows() != a.cols()) throw Error(ErrorKind::Shape, "projection needs a square matrix");
    if (!(alpha < beta)) throw Error(ErrorKind::InvalidArgument, "need alpha < beta");
    if (!a.allFinite()) throw Error(ErrorKind::NonFinite, "projection input is not finite");
    const Matrix sym = 0.5 * (a + a.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
    if (es.info() != Eigen::Success) {
        throw Error(ErrorKind::EigenFailure, "symmetric eigendecomposition did not converge");
    }
    const Vector& ev = es.eigenvalues();
    if (ev.minCoeff() >= alpha && ev.maxCoeff() <= beta) return SymMatrix::symmetrize(sym);
    const Vector clipped = ev.cwiseMax(alpha).cwiseMin(beta);
    const Matrix& q = es.eigenvectors();
    return SymMatrix::symmetrize(q * clipped.asDiagonal() * q.transpose());
}

Vector loss_gradient(const Vector& z, const Loss& loss) {
    const double n = static_cast<double>(z.size());
    if (loss.kind == LossKind::Quadratic) return z / n;
    const double rho = loss.rho;
    return z.unaryExpr([rho](double v) { return std::abs(v) <= rho ? v : std::copysign(rho, v); }) / n;
}

double loss_value(const Vector& z, const Loss& loss) {
    const double n = static_cast<double>(z.size());
    if (loss.kind == LossKind::Quadratic) return 0.5 * z.squaredNorm() / n;
    const double rho = loss.rho;
    double total = 0.0;
    for (double v : z) {
        const double a = std::abs(v);
        total += a <= rho ? 0.5 * v * v : rho * (a - 0.5 * rho);
    }
    return total / n;
}

Matrix grad_f(const Matrix& omega, const DataMatrix& x, const Vector& tau_sq, const Loss& loss) {
    check_shapes(omega, x, tau_sq);
    if (loss.kind == LossKind::Quadratic) {
        const Matrix gram = detail::gram_of(x.values());
        return gradient_parallel(omega, x.values(), &gram, tau_sq, loss);
    }
    return gradient_parallel(omega, x.values(), nullptr, tau_sq, loss);
}

Matrix grad_f_serial(const Matrix& omega, const DataMatrix& x, const Vector& tau_sq,
                     const Loss& loss) {
    check_shapes(omega, x, tau_sq);
    if (loss.kind == LossKind::Quadratic) {
        const Matrix gram = detail::gram_of(x.values());
        return gradient_serial(omega, x.values(), &gram, tau_sq, loss);
    }
    return gradient_serial(omega, x.values(), nullptr, tau_sq, loss);
}

double lipschitz_constant(const DataMatrix& x, const Vector& tau_sq) {
    if (tau_sq.size() != x.p()) throw Error(ErrorKind::Shape, "tau_sq length must equal p");
    const Matrix gram = detail::gram_of(x.values());
    double best = 0.0;
    for (Eigen::Index j = 0; j < x.p(); ++j) {
        const double t4 = tau_sq(j) * tau_sq(j);
        best = std::max(best, t4 * detail::top_eigenvalue(detail::gram_without(gram, j)));
    }
    return best;
}

Matrix prox_g_over_eta(const Matrix& v, double eta, const Vector& tau_sq, const Vector& lambdas) {
    const Eigen::Index p = v.cols();
    Matrix out(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double level = tau_sq(j) * lambdas(j);
        for (Eigen::Index k = 0; k < p; ++k) {
            out(k, j) = k == j ? 1.0 / tau_sq(j) : soft_threshold(v(k, j), level) / eta;
        }
    }
    return out;
}

double jpr_objective(const Matrix& omega, const DataMatrix& x, const Vector& tau_sq,
                     const SolverConfig& config) {
    check_shapes(omega, x, tau_sq);
    const Matrix& xv = x.values();
    const Eigen::Index p = x.p();
    const bool penalized = config.lambdas.size() == p;
    double total = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
        Vector w = omega.col(j);
        w(j) = 0.0;
        const Vector z = xv.col(j) + tau_sq(j) * (xv * w);
        total += loss_value(z, config.loss);
        if (penalized) total += config.lambdas(j) * tau_sq(j) * w.lpNorm<1>();
    }
    return total;
}

Pd3oSolver::Pd3oSolver(const DataMatrix& x, Vector tau_sq, SolverConfig config)
    : x_(x), tau_sq_(std::move(tau_sq)), config_(std::move(config)) {
    const Eigen::Index p = x.p();
    if (tau_sq_.size() != p) throw Error(ErrorKind::Shape, "tau_sq length must equal p");
    for (Eigen::Index j = 0; j < p; ++j) {
        if (!(tau_sq_(j) > 0.0) || !std::isfinite(tau_sq_(j))) {
            throw Error(ErrorKind::DegenerateVariance,
                        "residual variance of feature " + x.feature_label(j) + " is " +
                            std::to_string(tau_sq_(j)));
        }
    }
    if (config_.lambdas.size() == 0) config_.lambdas = Vector::Zero(p);
    if (config_.lambdas.size() != p) throw Error(ErrorKind::Shape, "need one lambda per feature");
    if (!(config_.lambdas.array() >= 0.0).all() || !config_.lambdas.allFinite()) {
        throw Error(ErrorKind::InvalidArgument, "lambdas must be finite and >= 0");
    }
    if (!(config_.alpha >= 0.0) || !(config_.beta > config_.alpha)) {
        throw Error(ErrorKind::InvalidArgument, "need 0 <= alpha < beta");
    }
    if (!(config_.tol > 0.0) || config_.max_iter < 0) {
        throw Error(ErrorKind::InvalidArgument, "need tol > 0 and max_iter >= 0");
    }
    if (config_.loss.kind == LossKind::Huber && !(config_.loss.rho > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "huber rho must be > 0");
    }

    gram_ = detail::gram_of(x.values());
    for (Eigen::Index j = 0; j < p; ++j) {
        const double t4 = tau_sq_(j) * tau_sq_(j);
        lipschitz_ = std::max(lipschitz_, t4 * detail::top_eigenvalue(detail::gram_without(gram_, j)));
    }
    if (!(lipschitz_ > 0.0)) {
        throw Error(ErrorKind::DegenerateFeature, "loss has zero curvature (all-zero data?)");
    }

    gamma_ = config_.gamma.value_or(1.0 / lipschitz_);
    eta_ = config_.eta.value_or(1.0 / gamma_);
    if (!(gamma_ > 0.0) || !(eta_ > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "step sizes must be positive");
    }
    if (!(gamma_ < 2.0 / lipschitz_)) {
        throw Error(ErrorKind::InvalidArgument,
                    "gamma = " + std::to_string(gamma_) + " violates gamma < 2/L = " +
                        std::to_string(2.0 / lipschitz_));
    }
    // Auto steps give gamma * eta == 1 up to rounding.
    if (!(gamma_ * eta_ <= 1.0 + 1e-12)) {
        throw Error(ErrorKind::InvalidArgument, "step sizes violate gamma * eta <= 1");
    }
}

Matrix Pd3oSolver::gradient(const Matrix& omega) const {
    const Matrix* gram = config_.loss.kind == LossKind::Quadratic ? &gram_ : nullptr;
    return gradient_parallel(omega, x_.values(), gram, tau_sq_, config_.loss);
}

double Pd3oSolver::objective(const Matrix& omega) const {
    return jpr_objective(omega, x_, tau_sq_, config_);
}

Pd3oState Pd3oSolver::initial_state(const SymMatrix& omega0) const {
    const Eigen::Index p = x_.p();
    if (omega0.size() != p) throw Error(ErrorKind::Shape, "initial omega has the wrong size");
    Pd3oState s;
    s.omega = omega0;
    s.u = Matrix::Zero(p, p);
    s.grad_cache = gradient(omega0.values());
    s.iteration = 0;
    return s;
}

double Pd3oSolver::step(Pd3oState& state) const {
    const Matrix& omega = state.omega.values();
    SymMatrix omega_next = project_spectral_box(
        omega - gamma_ * state.u - gamma_ * state.grad_cache, config_.alpha, config_.beta);
    Matrix grad_next = gradient(omega_next.values());

    const Matrix v = state.u + eta_ * (2.0 * omega_next.values() - omega) +
                     (gamma_ * eta_) * (state.grad_cache - grad_next);
    Matrix u_next = v - eta_ * prox_g_over_eta(v, eta_, tau_sq_, config_.lambdas);

    const double residual =
        std::max((omega_next.values() - omega).norm(), (u_next - state.u).norm());
    state.omega = std::move(omega_next);
    state.u = std::move(u_next);
    state.grad_cache = std::move(grad_next);
    ++state.iteration;
    require_finite(state);
    return residual;
}

JprSolveResult Pd3oSolver::solve(const std::optional<SymMatrix>& omega0) const {
    const SymMatrix start =
        omega0 ? *omega0
               : project_spectral_box(Matrix(tau_sq_.cwiseInverse().asDiagonal()), config_.alpha,
                                      config_.beta);
    Pd3oState state = initial_state(start);
    JprSolveResult result;
    result.lipschitz = lipschitz_;
    result.gamma = gamma_;
    result.eta = eta_;
    result.residual = std::numeric_limits<double>::infinity();
    while (state.iteration < config_.max_iter) {
        result.residual = step(state);
        if (result.residual <= config_.tol) {
            result.converged = true;
            break;
        }
    }
    result.iterations = state.iteration;
    result.omega = std::move(state.omega);
    result.u = std::move(state.u);
    return result;
}

Pd3oState pd3o_step(const Pd3oState& state, const DataMatrix& x, const Vector& tau_sq,
                    const SolverConfig& config) {
    Pd3oSolver solver(x, tau_sq, config);
    Pd3oState next = state;
    solver.step(next);
    return next;
}

JprSolveResult solve_jpr(const DataMatrix& x, const Vector& tau_sq, const SolverConfig& config,
                         const std::optional<SymMatrix>& omega0) {
    return Pd3oSolver(x, tau_sq, config).solve(omega0);
}

}  // namespace jpr
