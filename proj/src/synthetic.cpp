#include "jpr/synthetic.hpp"

#include "jpr/error.hpp"
#include "jpr/rng.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace jpr {

namespace {

constexpr int kMaxRedraws = 100;

// Stream tags for seeds derived from a model seed.
constexpr std::uint64_t kAdjacencyStream = 1;
constexpr std::uint64_t kSignStream = 2;

Matrix erdos_renyi(Eigen::Index p, double prob, Rng& rng) {
    Matrix a = Matrix::Zero(p, p);
    for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index k = j + 1; k < p; ++k)
            if (rng.uniform() < prob) a(j, k) = a(k, j) = 1.0;
    return a;
}

Matrix path_graph(Eigen::Index p) {
    Matrix a = Matrix::Zero(p, p);
    for (Eigen::Index j = 0; j + 1 < p; ++j) a(j, j + 1) = a(j + 1, j) = 1.0;
    return a;
}

Matrix hub_graph(Eigen::Index p, const Hub& hub, Rng& rng) {
    // The other p - 1 nodes each need min_deg partners among the p - 2 non-hub nodes.
    if (p - 2 < hub.min_deg) {
        throw Error(ErrorKind::InfeasibleDegree,
                    "hub model with p = " + std::to_string(p) + " cannot give every node " +
                        std::to_string(hub.min_deg) + " non-hub connection(s)");
    }
    Matrix a = Matrix::Zero(p, p);

    const auto hub_degree =
        static_cast<Eigen::Index>(std::ceil(hub.hub_fraction * static_cast<double>(p - 1)));
    std::vector<Eigen::Index> others(static_cast<std::size_t>(p - 1));
    std::iota(others.begin(), others.end(), Eigen::Index{1});
    for (Eigen::Index i = 0; i < hub_degree; ++i) {
        const auto pick = static_cast<Eigen::Index>(
            rng.uniform_int(static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(p - 2)));
        std::swap(others[i], others[pick]);
        a(0, others[i]) = a(others[i], 0) = 1.0;
    }

    std::vector<int> degree(static_cast<std::size_t>(p), 0);
    for (Eigen::Index v = 1; v < p; ++v) {
        const auto target = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(hub.min_deg),
                                                             static_cast<std::uint64_t>(hub.max_deg)));
        int redraws = 0;
        while (degree[v] < target && redraws <= kMaxRedraws) {
            const auto w = static_cast<Eigen::Index>(rng.uniform_int(1, static_cast<std::uint64_t>(p - 1)));
            if (w == v || a(v, w) != 0.0 || degree[w] >= hub.max_deg) {
                ++redraws;
                continue;
            }
            a(v, w) = a(w, v) = 1.0;
            ++degree[v];
            ++degree[w];
        }
    }
    return a;
}

}  // namespace

std::string model_label(const NetworkModel& kind) {
    std::ostringstream os;
    std::visit(
        [&](const auto& m) {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, ErdosRenyi>) {
                os << "er(" << m.edge_prob << ")";
            } else if constexpr (std::is_same_v<M, Ar1>) {
                os << "ar1";
            } else {
                os << "hub(" << m.hub_fraction << "," << m.min_deg << "," << m.max_deg << ")";
            }
        },
        kind);
    return os.str();
}

void validate(const PrecisionModelSpec& spec) {
    if (spec.p < 2) throw Error(ErrorKind::InvalidArgument, "p must be >= 2");
    std::visit(
        [](const auto& m) {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, ErdosRenyi>) {
                if (!(m.edge_prob >= 0.0 && m.edge_prob <= 1.0))
                    throw Error(ErrorKind::InvalidArgument, "edge probability must be in [0, 1]");
            } else if constexpr (std::is_same_v<M, Hub>) {
                if (!(m.hub_fraction >= 0.0 && m.hub_fraction <= 1.0))
                    throw Error(ErrorKind::InvalidArgument, "hub fraction must be in [0, 1]");
                if (m.min_deg < 1 || m.min_deg > m.max_deg)
                    throw Error(ErrorKind::InvalidArgument, "need 1 <= min_deg <= max_deg");
            }
        },
        spec.kind);
}

Matrix gen_adjacency(const PrecisionModelSpec& spec) {
    validate(spec);
    Rng rng(spec.seed);
    return std::visit(
        [&](const auto& m) -> Matrix {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, ErdosRenyi>) {
                return erdos_renyi(spec.p, m.edge_prob, rng);
            } else if constexpr (std::is_same_v<M, Ar1>) {
                return path_graph(spec.p);
            } else {
                return hub_graph(spec.p, m, rng);
            }
        },
        spec.kind);
}

GroundTruth adjacency_to_precision(const Matrix& adjacency, std::uint64_t seed) {
    const Eigen::Index p = adjacency.rows();
    if (adjacency.cols() != p) throw Error(ErrorKind::Shape, "adjacency must be square");
    Rng rng(seed);
    Matrix omega = Matrix::Zero(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        for (Eigen::Index k = j + 1; k < p; ++k) {
            if (adjacency(j, k) != adjacency(k, j)) {
                throw Error(ErrorKind::InvalidArgument, "adjacency must be symmetric");
            }
            if (adjacency(j, k) == 0.0) continue;
            omega(j, k) = omega(k, j) = rng.coin() ? 1.0 : -1.0;
        }
    }
    for (Eigen::Index j = 0; j < p; ++j) omega(j, j) = 1.0 + omega.row(j).cwiseAbs().sum();

    Eigen::LLT<Matrix> llt(omega);
    if (llt.info() != Eigen::Success) {
        throw Error(ErrorKind::NotPositiveDefinite, "precision matrix is not positive definite");
    }
    const Matrix sigma = llt.solve(Matrix::Identity(p, p));
    const Vector tau = omega.diagonal().cwiseSqrt().cwiseInverse();
    Matrix q = -(tau.asDiagonal() * omega * tau.asDiagonal());
    q.diagonal().setConstant(-1.0);

    GroundTruth truth;
    truth.omega_star = SymMatrix(omega);
    truth.sigma_star = SymMatrix::symmetrize(sigma);
    truth.adjacency = adjacency;
    truth.q_star = SymMatrix::symmetrize(q);
    return truth;
}

GroundTruth generate_truth(const PrecisionModelSpec& spec) {
    PrecisionModelSpec adj_spec = spec;
    adj_spec.seed = mix_seed(spec.seed, kAdjacencyStream);
    return adjacency_to_precision(gen_adjacency(adj_spec), mix_seed(spec.seed, kSignStream));
}

DataMatrix sample_gaussian(const SymMatrix& sigma, Eigen::Index n, std::uint64_t seed) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "need n >= 1");
    const Eigen::Index p = sigma.size();
    Eigen::LLT<Matrix> llt(sigma.values());
    if (llt.info() != Eigen::Success) {
        throw Error(ErrorKind::NotPositiveDefinite, "covariance is not positive definite");
    }
    Rng rng(seed);
    Matrix z(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < p; ++k) z(i, k) = rng.normal();
    const Matrix c = llt.matrixL();
    return DataMatrix(z * c.transpose());
}

}  // namespace jpr
