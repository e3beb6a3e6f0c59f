#include "jpr/error.hpp"
#include "jpr/estimator.hpp"
#include "jpr/synthetic.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <set>
#include <utility>

using namespace jpr;

namespace {

LassoFit make_fit(std::initializer_list<double> theta, double tau_sq) {
    LassoFit f;
    f.theta = Vector(static_cast<Eigen::Index>(theta.size()));
    Eigen::Index i = 0;
    for (double t : theta) f.theta(i++) = t;
    f.tau_sq = tau_sq;
    return f;
}

void check_invariants(const JprEstimate& est) {
    const Eigen::Index p = est.q_hat.size();
    const Matrix& q = est.q_hat.values();
    CHECK(q == q.transpose());
    for (Eigen::Index j = 0; j < p; ++j) {
        CHECK(q(j, j) == -1.0);
        CHECK(est.omega_hat(j, j) == 1.0 / est.tau_sq(j));
    }
    CHECK(oracle::min_eigenvalue(-q) >= -1e-6);
    CHECK(q.cwiseAbs().maxCoeff() <= 1.0 + 1e-6);
    CHECK(oracle::min_eigenvalue(est.omega_hat.values()) >= -1e-6);
}

}  // namespace

TEST_CASE("init_omega examples") {
    auto empty = init_omega({make_fit({0.0}, 1.0), make_fit({0.0}, 1.0)});
    CHECK(empty.values() == Matrix::Identity(2, 2));

    auto pair = init_omega({make_fit({0.5}, 1.0), make_fit({0.5}, 1.0)});
    Matrix expected(2, 2);
    expected << 1, -0.5, -0.5, 1;
    CHECK((pair.values() - expected).cwiseAbs().maxCoeff() < 1e-14);

    auto avg = init_omega({make_fit({0.5}, 1.0), make_fit({0.1}, 1.0)});
    CHECK(avg(0, 1) == doctest::Approx(-0.3).epsilon(1e-14));
    CHECK(avg(1, 0) == doctest::Approx(-0.3).epsilon(1e-14));

    CHECK_THROWS_AS(init_omega({make_fit({0.5}, 0.0), make_fit({0.1}, 1.0)}), Error);
}

TEST_CASE("regression_matrix uses the coefficient layout") {
    // Feature 1 (0-based) regressed on features 0 and 2.
    auto m = regression_matrix({make_fit({0.0, 0.0}, 1.0), make_fit({0.2, -0.4}, 2.0), make_fit({0.0, 0.0}, 1.0)});
    CHECK(m(1, 1) == 0.5);
    CHECK(m(0, 1) == -0.1);
    CHECK(m(2, 1) == 0.2);
}

TEST_CASE("partial_correlation_from examples") {
    Matrix o(2, 2);
    o << 2, -1, -1, 2;
    const double t = 1.0 / std::sqrt(2.0);
    auto q = partial_correlation_from(SymMatrix(o), Vector::Constant(2, t));
    CHECK(q(0, 0) == doctest::Approx(-1.0));
    CHECK(q(0, 1) == doctest::Approx(0.5));

    Matrix d = Vector(Eigen::Vector3d(4.0, 0.25, 2.0)).asDiagonal();
    Vector tau = d.diagonal().cwiseInverse().cwiseSqrt();
    auto qd = partial_correlation_from(SymMatrix(d), tau);
    CHECK((qd.values() + Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-15);

    Matrix r = oracle::gaussian_matrix(4, 4, 3);
    r = (0.5 * (r + r.transpose())).eval();
    CHECK(partial_correlation_from(SymMatrix(r), Vector::Ones(4)).values() == -r);
}

TEST_CASE("partial_correlation_from is sign consistent") {
    Matrix r = oracle::gaussian_matrix(6, 6, 9);
    r = (0.5 * (r + r.transpose())).eval();
    Rng rng(5);
    Vector tau(6);
    for (Eigen::Index j = 0; j < 6; ++j) tau(j) = 0.1 + rng.uniform();
    auto q = partial_correlation_from(SymMatrix(r), tau);
    for (Eigen::Index j = 0; j < 6; ++j)
        for (Eigen::Index k = 0; k < 6; ++k)
            if (j != k) CHECK((q(j, k) > 0) == (r(j, k) < 0));
}

TEST_CASE("edges examples") {
    Matrix q = -Matrix::Identity(3, 3);
    CHECK(edges(SymMatrix(q), 0.0).empty());
    q(0, 1) = q(1, 0) = 0.5;
    auto e = edges(SymMatrix(q), 0.1);
    REQUIRE(e.size() == 1);
    CHECK(e[0].j == 0);
    CHECK(e[0].k == 1);
    CHECK(e[0].weight == 0.5);
    CHECK(edges(SymMatrix(q), 0.6).empty());

    q(0, 2) = q(2, 0) = -0.7;
    q(1, 2) = q(2, 1) = 0.5;
    e = edges(SymMatrix(q), 0.0);
    REQUIRE(e.size() == 3);
    CHECK(e[0].weight == -0.7);
    CHECK((e[1].j == 0 && e[1].k == 1));
    CHECK((e[2].j == 1 && e[2].k == 2));
}

TEST_CASE("edges: no self loops or duplicate pairs") {
    Matrix r = oracle::gaussian_matrix(8, 8, 4);
    r = (0.5 * (r + r.transpose())).eval();
    auto e = edges(SymMatrix(r), 0.2);
    std::set<std::pair<Eigen::Index, Eigen::Index>> seen;
    for (const auto& edge : e) {
        CHECK(edge.j < edge.k);
        CHECK(seen.insert({edge.j, edge.k}).second);
        CHECK(std::abs(edge.weight) > 0.2);
    }
    for (std::size_t i = 1; i < e.size(); ++i) CHECK(std::abs(e[i - 1].weight) >= std::abs(e[i].weight));
}

TEST_CASE("fit with lambda = 0 recovers the inverse sample covariance") {
    DataMatrix x(oracle::gaussian_matrix(200, 10, 12));
    auto est = fit(x, FixedLambda{0.0});
    const Matrix c = oracle::centered(x.values());
    const Matrix inv = (c.transpose() * c / 200.0).inverse();
    CHECK(est.solve_diag.converged);
    CHECK(oracle::relative_frobenius(est.omega_hat.values(), inv) <= 1e-3);
    check_invariants(est);
}

TEST_CASE("fit with a huge penalty gives the empty graph") {
    auto truth = generate_truth({ErdosRenyi{0.3}, 6, 2});
    auto x = sample_gaussian(truth.sigma_star, 100, 3);
    auto est = fit(x, FixedLambda{1e3});
    CHECK(est.q_hat.values() == -Matrix::Identity(6, 6));
    for (const auto& f : est.stage1) CHECK(f.support_size() == 0);
    auto naive = naive_symmetrized(x, FixedLambda{1e3});
    Matrix expected = est.tau_sq.cwiseInverse().asDiagonal();
    CHECK((naive.values() - expected).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("fit fills lambdas from stage 1 and reports diagnostics") {
    auto truth = generate_truth({Ar1{}, 8, 1});
    auto x = sample_gaussian(truth.sigma_star, 120, 2);
    auto est = fit(x, TheoryLambda{});
    const double expected = theory_lambda(1.0, 8, 120);
    for (Eigen::Index j = 0; j < 8; ++j) CHECK(est.lambdas(j) == doctest::Approx(expected));
    CHECK(est.solve_diag.converged);
    CHECK(est.solve_diag.iterations > 0);
    CHECK(est.solve_diag.lipschitz > 0.0);
    CHECK(est.solve_diag.diagonal_deviation >= 0.0);
    CHECK(est.tau.cwiseProduct(est.tau).isApprox(est.tau_sq));
    check_invariants(est);
}

TEST_CASE("fit invariants across models") {
    std::vector<NetworkModel> models{ErdosRenyi{0.1}, Ar1{}, Hub{}};
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        for (const auto& m : models) {
            auto truth = generate_truth({m, 12, seed});
            auto x = sample_gaussian(truth.sigma_star, 60, seed + 100);
            check_invariants(fit(x, TheoryLambda{}));
        }
    }
}

TEST_CASE("fit errors: collinear and constant features") {
    Matrix v = oracle::gaussian_matrix(30, 3, 6);
    v.col(2) = v.col(0) + 2.0 * v.col(1);
    try {
        fit(DataMatrix(v), FixedLambda{0.0}, {}, FitOptions{true, false, {1e-14, 100000}});
        FAIL("expected DegenerateVariance");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateVariance);
    }

    Matrix c = oracle::gaussian_matrix(30, 3, 7);
    c.col(1).setConstant(4.0);
    try {
        fit(DataMatrix(c), TheoryLambda{});
        FAIL("expected DegenerateFeature");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateFeature);
    }
}

TEST_CASE("naive_symmetrized averages the regression matrix") {
    auto truth = generate_truth({ErdosRenyi{0.3}, 5, 8});
    auto x = sample_gaussian(truth.sigma_star, 80, 9);
    auto naive = naive_symmetrized(x, FixedLambda{0.05});
    auto fits = fit_all_features(center_columns(x), FixedLambda{0.05});
    const Matrix m = regression_matrix(fits);
    CHECK((naive.values() - 0.5 * (m + m.transpose())).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("sample_inverse_covariance matches a direct inverse and needs n > p") {
    DataMatrix x(oracle::gaussian_matrix(40, 4, 10));
    const Matrix c = oracle::centered(x.values());
    const Matrix inv = (c.transpose() * c / 40.0).inverse();
    CHECK(oracle::relative_frobenius(sample_inverse_covariance(x).values(), inv) < 1e-12);
    CHECK_THROWS_AS(sample_inverse_covariance(DataMatrix(oracle::gaussian_matrix(4, 4, 1))), Error);
}

TEST_CASE("standardized fits remain valid") {
    Matrix v = oracle::gaussian_matrix(80, 5, 13);
    v.col(0) *= 100.0;
    auto est = fit(DataMatrix(v), TheoryLambda{}, {}, FitOptions{true, true, {}});
    check_invariants(est);
}

TEST_CASE("apply_prox_support zeroes only pairs the prox sends to zero") {
    Matrix omega(3, 3);
    omega << 2, 1e-12, 0.4,
             1e-12, 2, -3e-13,
             0.4, -3e-13, 2;
    Matrix u = Matrix::Zero(3, 3);
    u(0, 1) = 0.05;   // |u + eta*omega| below tau^2 lambda = 0.1 in both entries
    u(1, 0) = -0.05;
    u(1, 2) = 0.2;    // one side above its threshold: pair is kept
    const Vector tau_sq = Vector::Ones(3);
    const Vector lambdas = Vector::Constant(3, 0.1);
    Matrix cleaned = omega;
    const double removed = apply_prox_support(cleaned, u, 1.0, tau_sq, lambdas);
    CHECK(cleaned(0, 1) == 0.0);
    CHECK(cleaned(1, 0) == 0.0);
    CHECK(cleaned(1, 2) == -3e-13);
    CHECK(cleaned(0, 2) == 0.4);
    CHECK(cleaned.diagonal() == omega.diagonal());
    CHECK(removed == 1e-12);
}

TEST_CASE("fit returns exact zeros and only removes round-off") {
    auto truth = generate_truth({ErdosRenyi{0.05}, 40, 5});
    auto x = sample_gaussian(truth.sigma_star, 300, 6);
    auto est = fit(x, TheoryLambda{});
    const Matrix& o = est.omega_hat.values();
    const auto exact = (o.array() == 0.0).count();
    CHECK(exact > 0);
    CHECK(exact == (o.array().abs() <= 1e-6).count());
    CHECK(est.solve_diag.zeroed_max <= 1e-8);
    check_invariants(est);
}
