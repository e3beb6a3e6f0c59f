#include "jpr/metrics.hpp"

#include "jpr/error.hpp"
#include "jpr/rng.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace jpr {

namespace {

void require_same_shape(const SymMatrix& a, const SymMatrix& b) {
    if (a.size() != b.size()) {
        throw Error(ErrorKind::Shape, "matrices differ in size: " + std::to_string(a.size()) +
                                          " vs " + std::to_string(b.size()));
    }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Q from a precision estimate with tau_j = 1 / sqrt(Omega_jj).
SymMatrix partial_correlation_of(const SymMatrix& omega) {
    const Vector tau = omega.values().diagonal().cwiseSqrt().cwiseInverse();
    Matrix q = partial_correlation_from(omega, tau).values();
    q.diagonal().setConstant(-1.0);
    return SymMatrix::symmetrize(q);
}

void score(BenchRecord& rec, const GroundTruth& truth, const SymMatrix& omega, const SymMatrix& q,
           double support_threshold) {
    rec.frobenius_err = frobenius_error(omega, truth.omega_star);
    rec.operator2_err = operator2_error(omega, truth.omega_star);
    rec.q_frobenius_err = frobenius_error(q, truth.q_star);
    const auto s = support_metrics(omega, truth.adjacency, support_threshold);
    rec.support_precision = s.precision;
    rec.support_recall = s.recall;
}

constexpr double kDenseSupportThreshold = 1e-8;

}  // namespace

double frobenius_error(const SymMatrix& a, const SymMatrix& b) {
    require_same_shape(a, b);
    return (a.values() - b.values()).norm();
}

double operator2_error(const SymMatrix& a, const SymMatrix& b) {
    require_same_shape(a, b);
    const Matrix d = a.values() - b.values();
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (d + d.transpose()), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw Error(ErrorKind::EigenFailure, "eigenvalue solver did not converge");
    }
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

SupportMetrics support_metrics(const SymMatrix& est, const Matrix& truth_adjacency, double threshold) {
    const Eigen::Index p = est.size();
    if (truth_adjacency.rows() != p || truth_adjacency.cols() != p) {
        throw Error(ErrorKind::Shape, "adjacency and estimate differ in size");
    }
    long predicted = 0, actual = 0, hits = 0;
    for (Eigen::Index j = 0; j < p; ++j) {
        for (Eigen::Index k = j + 1; k < p; ++k) {
            const bool pred = std::abs(est(j, k)) > threshold;
            const bool real = truth_adjacency(j, k) != 0.0;
            predicted += pred;
            actual += real;
            hits += pred && real;
        }
    }
    SupportMetrics m;
    m.precision = predicted == 0 ? 1.0 : static_cast<double>(hits) / static_cast<double>(predicted);
    m.recall = actual == 0 ? 1.0 : static_cast<double>(hits) / static_cast<double>(actual);
    return m;
}

std::string to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::Jpr: return "jpr";
        case EstimatorKind::Naive: return "naive";
        case EstimatorKind::SampleInverse: return "sample-inverse";
    }
    return "unknown";
}

EstimatorKind estimator_from_string(const std::string& name) {
    if (name == "jpr") return EstimatorKind::Jpr;
    if (name == "naive") return EstimatorKind::Naive;
    if (name == "sample-inverse") return EstimatorKind::SampleInverse;
    throw Error(ErrorKind::InvalidArgument, "unknown estimator '" + name + "'");
}

std::uint64_t replication_seed(std::uint64_t model_seed, int rep) {
    return mix_seed(model_seed, 1000 + static_cast<std::uint64_t>(rep));
}

std::uint64_t sample_seed(std::uint64_t replication_seed) {
    return mix_seed(replication_seed, 7);
}

std::vector<BenchRecord> run_benchmark(const std::vector<PrecisionModelSpec>& models, Eigen::Index n,
                                       int reps, const std::vector<EstimatorKind>& estimators,
                                       const LambdaRule& rule, const SolverConfig& config,
                                       const BenchOptions& options) {
    if (reps < 1) throw Error(ErrorKind::InvalidArgument, "reps must be >= 1");
    if (n < 2) throw Error(ErrorKind::InvalidArgument, "n must be >= 2");
    validate(rule);
    for (const auto& m : models) validate(m);

    std::vector<BenchRecord> records;
    for (const auto& model : models) {
        for (int rep = 0; rep < reps; ++rep) {
            PrecisionModelSpec spec = model;
            spec.seed = replication_seed(model.seed, rep);
            BenchRecord base;
            base.model = model_label(model.kind);
            base.p = model.p;
            base.n = n;
            base.rep = rep;
            base.seed = spec.seed;

            std::optional<GroundTruth> truth;
            std::optional<DataMatrix> data;
            std::string setup_error;
            try {
                truth = generate_truth(spec);
                data = sample_gaussian(truth->sigma_star, n, sample_seed(spec.seed));
            } catch (const std::exception& e) {
                setup_error = e.what();
            }

            for (EstimatorKind kind : estimators) {
                if (kind == EstimatorKind::SampleInverse && n <= model.p) continue;
                BenchRecord rec = base;
                rec.estimator = to_string(kind);
                if (!setup_error.empty()) {
                    rec.status = "error: " + setup_error;
                    records.push_back(rec);
                    continue;
                }
                try {
                    const auto start = std::chrono::steady_clock::now();
                    switch (kind) {
                        case EstimatorKind::Jpr: {
                            const auto est = fit(*data, rule, config, options.fit);
                            rec.wall_time_s = seconds_since(start);
                            score(rec, *truth, est.omega_hat, est.q_hat, 0.0);
                            rec.iterations = est.solve_diag.iterations;
                            rec.converged = est.solve_diag.converged;
                            rec.mean_lambda = est.lambdas.mean();
                            if (options.fixed_iterations > 0) {
                                const DataMatrix prepared = prepare_data(*data, options.fit);
                                SolverConfig fixed = config;
                                fixed.lambdas = est.lambdas;
                                fixed.max_iter = options.fixed_iterations;
                                fixed.tol = std::numeric_limits<double>::min();
                                const Pd3oSolver solver(prepared, est.tau_sq, fixed);
                                const auto omega0 = init_omega(est.stage1, fixed.alpha, fixed.beta);
                                const auto t0 = std::chrono::steady_clock::now();
                                solver.solve(omega0);
                                rec.fixed_iter_time_s = seconds_since(t0);
                            }
                            break;
                        }
                        case EstimatorKind::Naive: {
                            const auto omega = naive_symmetrized(*data, rule, options.fit);
                            rec.wall_time_s = seconds_since(start);
                            score(rec, *truth, omega, partial_correlation_of(omega),
                                  kDenseSupportThreshold);
                            break;
                        }
                        case EstimatorKind::SampleInverse: {
                            const auto omega = sample_inverse_covariance(*data, options.fit.center);
                            rec.wall_time_s = seconds_since(start);
                            score(rec, *truth, omega, partial_correlation_of(omega),
                                  kDenseSupportThreshold);
                            break;
                        }
                    }
                } catch (const std::exception& e) {
                    rec.status = std::string("error: ") + e.what();
                }
                records.push_back(std::move(rec));
            }
        }
    }
    return records;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& records) {
    out << "model,p,n,rep,seed,estimator,frobenius_err,operator2_err,q_frobenius_err,"
           "support_precision,support_recall,wall_time_s,fixed_iter_time_s,iterations,"
           "converged,mean_lambda,status\n";
    const auto old_precision = out.precision(17);
    for (const auto& r : records) {
        std::string status = r.status;
        for (char& c : status)
            if (c == ',' || c == '\n') c = ';';
        out << '"' << r.model << '"' << ',' << r.p << ',' << r.n << ',' << r.rep << ',' << r.seed
            << ',' << r.estimator << ',' << r.frobenius_err << ',' << r.operator2_err << ','
            << r.q_frobenius_err << ',' << r.support_precision << ',' << r.support_recall << ','
            << r.wall_time_s << ',' << r.fixed_iter_time_s << ',' << r.iterations << ','
            << (r.converged ? "true" : "false") << ',' << r.mean_lambda << ',' << status << '\n';
    }
    out.precision(old_precision);
}

void write_bench_jsonl(std::ostream& out, const std::vector<BenchRecord>& records) {
    for (const auto& r : records) {
        nlohmann::json j = {
            {"model", r.model},
            {"p", r.p},
            {"n", r.n},
            {"rep", r.rep},
            {"seed", r.seed},
            {"estimator", r.estimator},
            {"frobenius_err", r.frobenius_err},
            {"operator2_err", r.operator2_err},
            {"q_frobenius_err", r.q_frobenius_err},
            {"support_precision", r.support_precision},
            {"support_recall", r.support_recall},
            {"wall_time_s", r.wall_time_s},
            {"fixed_iter_time_s", r.fixed_iter_time_s},
            {"iterations", r.iterations},
            {"converged", r.converged},
            {"mean_lambda", r.mean_lambda},
            {"status", r.status},
        };
        out << j.dump() << '\n';
    }
}

}  // namespace jpr
