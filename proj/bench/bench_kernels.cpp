// Parallel kernels against their serial references. Thread count follows
// OMP_NUM_THREADS / JPR_THREADS.

#include "jpr/estimator.hpp"
#include "jpr/lasso.hpp"
#include "jpr/pd3o.hpp"
#include "jpr/synthetic.hpp"

#include <benchmark/benchmark.h>

#include <limits>

using namespace jpr;

namespace {

struct Problem {
    DataMatrix x;
    Vector tau_sq;
    Matrix omega;
};

Problem make_problem(Eigen::Index p, Eigen::Index n = 500) {
    auto truth = generate_truth({ErdosRenyi{0.05}, p, 1});
    auto x = center_columns(sample_gaussian(truth.sigma_star, n, 2));
    Vector tau_sq = truth.omega_star.values().diagonal().cwiseInverse();
    return {std::move(x), std::move(tau_sq), truth.omega_star.values()};
}

void BM_GradF(benchmark::State& state) {
    const auto prob = make_problem(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(grad_f(prob.omega, prob.x, prob.tau_sq, Loss::quadratic()));
}

void BM_GradFSerial(benchmark::State& state) {
    const auto prob = make_problem(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(grad_f_serial(prob.omega, prob.x, prob.tau_sq, Loss::quadratic()));
}

void BM_GradFHuber(benchmark::State& state) {
    const auto prob = make_problem(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(grad_f(prob.omega, prob.x, prob.tau_sq, Loss::huber(1.345)));
}

void BM_GradFHuberSerial(benchmark::State& state) {
    const auto prob = make_problem(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(grad_f_serial(prob.omega, prob.x, prob.tau_sq, Loss::huber(1.345)));
}

void BM_FitAllFeatures(benchmark::State& state) {
    const auto prob = make_problem(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(fit_all_features(prob.x, TheoryLambda{}));
}

void BM_FitAllFeaturesSerial(benchmark::State& state) {
    const auto prob = make_problem(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(fit_all_features_serial(prob.x, TheoryLambda{}));
}

void BM_Projection(benchmark::State& state) {
    const auto prob = make_problem(state.range(0));
    const Matrix a = prob.omega - 1.5 * Matrix::Identity(prob.omega.rows(), prob.omega.cols());
    for (auto _ : state)
        benchmark::DoNotOptimize(project_spectral_box(a, 0.0, std::numeric_limits<double>::infinity()));
}

void BM_Pd3oStep(benchmark::State& state) {
    const auto prob = make_problem(state.range(0));
    const Eigen::Index p = prob.x.p();
    SolverConfig cfg;
    cfg.lambdas = Vector::Constant(p, theory_lambda(1.0, double(p), double(prob.x.n())));
    Pd3oSolver solver(prob.x, prob.tau_sq, cfg);
    auto s = solver.initial_state(SymMatrix::identity(p));
    for (auto _ : state) benchmark::DoNotOptimize(solver.step(s));
}

}  // namespace

BENCHMARK(BM_GradF)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GradFSerial)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GradFHuber)->Arg(50)->Arg(100)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GradFHuberSerial)->Arg(50)->Arg(100)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_FitAllFeatures)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FitAllFeaturesSerial)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Projection)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Pd3oStep)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
