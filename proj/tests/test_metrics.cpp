#include "jpr/error.hpp"
#include "jpr/metrics.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <sstream>

using namespace jpr;

namespace {

SymMatrix sym_random(Eigen::Index p, std::uint64_t seed) {
    Matrix r = oracle::gaussian_matrix(p, p, seed);
    return SymMatrix((0.5 * (r + r.transpose())).eval());
}

SymMatrix diag(std::initializer_list<double> v) {
    Vector d(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) d(i++) = x;
    return SymMatrix(Matrix(d.asDiagonal()));
}

// Everything except the wall-clock fields.
bool same_record(const BenchRecord& a, const BenchRecord& b) {
    return a.model == b.model && a.p == b.p && a.n == b.n && a.rep == b.rep && a.seed == b.seed &&
           a.estimator == b.estimator && a.frobenius_err == b.frobenius_err &&
           a.operator2_err == b.operator2_err && a.q_frobenius_err == b.q_frobenius_err &&
           a.support_precision == b.support_precision && a.support_recall == b.support_recall &&
           a.iterations == b.iterations && a.converged == b.converged &&
           a.mean_lambda == b.mean_lambda && a.status == b.status;
}

}  // namespace

TEST_CASE("frobenius_error examples") {
    const auto a = sym_random(3, 1);
    CHECK(frobenius_error(a, a) == 0.0);
    CHECK(frobenius_error(diag({3.0, 4.0}), diag({0.0, 0.0})) == doctest::Approx(5.0));
    const auto b = sym_random(3, 2);
    double ss = 0.0;
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) ss += (a(j, k) - b(j, k)) * (a(j, k) - b(j, k));
    CHECK(std::abs(frobenius_error(a, b) - std::sqrt(ss)) <= 1e-12);
    CHECK_THROWS_AS(frobenius_error(a, sym_random(4, 1)), Error);
}

TEST_CASE("operator2_error examples") {
    CHECK(operator2_error(diag({3.0, -4.0}), diag({0.0, 0.0})) == doctest::Approx(4.0));
    const auto a = sym_random(4, 3);
    CHECK(operator2_error(a, a) == 0.0);
    for (std::uint64_t seed = 10; seed < 20; ++seed) {
        const auto b = sym_random(4, seed);
        const double oracle_value = oracle::power_iteration_abs_max(a.values() - b.values());
        CHECK(std::abs(operator2_error(a, b) - oracle_value) <= 1e-8);
    }
    CHECK_THROWS_AS(operator2_error(a, sym_random(3, 1)), Error);
}

TEST_CASE("support_metrics examples") {
    Matrix truth = Matrix::Zero(4, 4);
    auto link = [](Matrix& m, int j, int k, double w = 1.0) { m(j, k) = m(k, j) = w; };
    link(truth, 0, 1);
    link(truth, 1, 2);
    link(truth, 2, 3);

    Matrix est = -Matrix::Identity(4, 4);
    link(est, 0, 1, 0.3);
    link(est, 1, 2, -0.2);
    link(est, 2, 3, 0.1);
    auto exact = support_metrics(SymMatrix(est), truth, 0.0);
    CHECK(exact.precision == 1.0);
    CHECK(exact.recall == 1.0);

    auto empty = support_metrics(SymMatrix(Matrix(-Matrix::Identity(4, 4))), truth, 0.0);
    CHECK(empty.precision == 1.0);
    CHECK(empty.recall == 0.0);

    link(est, 2, 3, 0.0);
    link(est, 0, 3, 0.4);
    auto swapped = support_metrics(SymMatrix(est), truth, 0.0);
    CHECK(swapped.precision == doctest::Approx(2.0 / 3.0));
    CHECK(swapped.recall == doctest::Approx(2.0 / 3.0));

    auto thresholded = support_metrics(SymMatrix(est), truth, 0.25);
    CHECK(thresholded.precision == doctest::Approx(0.5));
    CHECK(thresholded.recall == doctest::Approx(1.0 / 3.0));

    auto no_truth = support_metrics(SymMatrix(est), Matrix::Zero(4, 4), 0.0);
    CHECK(no_truth.recall == 1.0);
    CHECK(no_truth.precision == 0.0);
}

TEST_CASE("estimator names round trip") {
    for (auto k : {EstimatorKind::Jpr, EstimatorKind::Naive, EstimatorKind::SampleInverse})
        CHECK(estimator_from_string(to_string(k)) == k);
    CHECK(to_string(EstimatorKind::SampleInverse) == "sample-inverse");
    CHECK_THROWS_AS(estimator_from_string("glasso"), Error);
}

TEST_CASE("benchmark records are deterministic") {
    std::vector<PrecisionModelSpec> models{{ErdosRenyi{0.1}, 10, 1}, {Hub{}, 10, 2}};
    std::vector<EstimatorKind> all{EstimatorKind::Jpr, EstimatorKind::Naive, EstimatorKind::SampleInverse};
    SolverConfig cfg;
    cfg.tol = 1e-3;
    BenchOptions opts;
    opts.fixed_iterations = 5;
    auto a = run_benchmark(models, 80, 2, all, TheoryLambda{}, cfg, opts);
    auto b = run_benchmark(models, 80, 2, all, TheoryLambda{}, cfg, opts);
    REQUIRE(a.size() == 2 * 2 * 3);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(same_record(a[i], b[i]));
        CHECK(a[i].status == "ok");
        CHECK(a[i].frobenius_err >= 0.0);
        CHECK(a[i].operator2_err >= 0.0);
        CHECK(a[i].q_frobenius_err >= 0.0);
        CHECK(a[i].support_precision >= 0.0);
        CHECK(a[i].support_precision <= 1.0);
        CHECK(a[i].support_recall >= 0.0);
        CHECK(a[i].support_recall <= 1.0);
        CHECK(a[i].wall_time_s >= 0.0);
    }
    CHECK(a[0].seed == replication_seed(1, 0));
    CHECK(a[0].estimator == "jpr");
    CHECK(a[0].fixed_iter_time_s > 0.0);
}

TEST_CASE("sample inverse: dense support, skipped when n <= p, error falls with n") {
    std::vector<PrecisionModelSpec> models{{ErdosRenyi{0.05}, 20, 3}};
    SolverConfig cfg;
    BenchOptions opts;
    opts.fixed_iterations = 0;
    const std::vector<EstimatorKind> inv{EstimatorKind::SampleInverse};
    auto small = run_benchmark(models, 250, 4, inv, TheoryLambda{}, cfg, opts);
    auto large = run_benchmark(models, 1000, 4, inv, TheoryLambda{}, cfg, opts);
    REQUIRE(small.size() == 4);
    double mean_small = 0.0, mean_large = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(small[i].frobenius_err > 0.0);
        CHECK(small[i].support_recall == 1.0);
        mean_small += small[i].frobenius_err / 4.0;
        mean_large += large[i].frobenius_err / 4.0;
    }
    CHECK(mean_large < mean_small);

    auto skipped = run_benchmark(models, 15, 1, inv, TheoryLambda{}, cfg, opts);
    CHECK(skipped.empty());
}

TEST_CASE("bench csv header matches the record fields") {
    std::vector<PrecisionModelSpec> models{{Ar1{}, 6, 1}};
    SolverConfig cfg;
    cfg.tol = 1e-3;
    BenchOptions opts;
    opts.fixed_iterations = 0;
    auto recs = run_benchmark(models, 50, 1, {EstimatorKind::Naive}, TheoryLambda{}, cfg, opts);
    std::ostringstream csv;
    write_bench_csv(csv, recs);
    std::istringstream in(csv.str());
    std::string header, row, extra;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header ==
          "model,p,n,rep,seed,estimator,frobenius_err,operator2_err,q_frobenius_err,"
          "support_precision,support_recall,wall_time_s,fixed_iter_time_s,iterations,converged,"
          "mean_lambda,status");
    CHECK(std::count(row.begin(), row.end(), ',') == std::count(header.begin(), header.end(), ','));
    CHECK_FALSE(std::getline(in, extra));

    std::ostringstream jsonl;
    write_bench_jsonl(jsonl, recs);
    CHECK(jsonl.str().find("\"estimator\":\"naive\"") != std::string::npos);
}
