#pragma once

#include "jpr/data.hpp"
#include "jpr/estimator.hpp"
#include "jpr/synthetic.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace jpr {

double frobenius_error(const SymMatrix& a, const SymMatrix& b);

/// Largest absolute eigenvalue of A - B.
double operator2_error(const SymMatrix& a, const SymMatrix& b);

struct SupportMetrics {
    double precision = 1.0;
    double recall = 1.0;
};

/// Edges are pairs j < k with |est_jk| > threshold. Empty predictions give
/// precision 1; an empty truth gives recall 1.
SupportMetrics support_metrics(const SymMatrix& est, const Matrix& truth_adjacency, double threshold);

enum class EstimatorKind { Jpr, Naive, SampleInverse };

std::string to_string(EstimatorKind kind);
EstimatorKind estimator_from_string(const std::string& name);

struct BenchRecord {
    std::string model;
    Eigen::Index p = 0;
    Eigen::Index n = 0;
    int rep = 0;
    std::uint64_t seed = 0;
    std::string estimator;
    double frobenius_err = 0.0;
    double operator2_err = 0.0;
    double q_frobenius_err = 0.0;
    double support_precision = 0.0;
    double support_recall = 0.0;
    double wall_time_s = 0.0;
    /// Joint-solver time for exactly BenchOptions::fixed_iterations steps (jpr only).
    double fixed_iter_time_s = 0.0;
    int iterations = 0;
    bool converged = true;
    double mean_lambda = 0.0;
    std::string status = "ok";
};

struct BenchOptions {
    FitOptions fit;
    /// Steps in the fixed-iteration timing run; 0 disables it.
    int fixed_iterations = 100;
};

/// For each model and replication: draw the truth and n samples, fit each
/// estimator, and score it against Omega* and Q*. The sample inverse is skipped
/// when n <= p. Failures land in BenchRecord::status.
std::vector<BenchRecord> run_benchmark(const std::vector<PrecisionModelSpec>& models, Eigen::Index n,
                                       int reps, const std::vector<EstimatorKind>& estimators,
                                       const LambdaRule& rule, const SolverConfig& config,
                                       const BenchOptions& options = {});

/// Seeds used for replication `rep` of a model.
std::uint64_t replication_seed(std::uint64_t model_seed, int rep);
std::uint64_t sample_seed(std::uint64_t replication_seed);

void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& records);
void write_bench_jsonl(std::ostream& out, const std::vector<BenchRecord>& records);

}  // namespace jpr
