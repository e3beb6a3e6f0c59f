#pragma once

#include "jpr/data.hpp"

#include <cstdint>
#include <string>
#include <variant>

namespace jpr {

struct ErdosRenyi {
    double edge_prob = 0.05;
};

/// Path graph: ones on the first off-diagonals.
struct Ar1 {};

/// Node 0 is the hub, attached to ceil(hub_fraction * (p - 1)) random nodes.
/// Every other node draws a degree target in [min_deg, max_deg] and is joined
/// to random non-hub partners until its non-hub degree reaches the target.
struct Hub {
    double hub_fraction = 0.20;
    int min_deg = 1;
    int max_deg = 3;
};

using NetworkModel = std::variant<ErdosRenyi, Ar1, Hub>;

struct PrecisionModelSpec {
    NetworkModel kind = ErdosRenyi{};
    Eigen::Index p = 10;
    std::uint64_t seed = 0;
};

/// Short label such as "er(0.05)", "ar1", "hub(0.2,1,3)".
std::string model_label(const NetworkModel& kind);

/// Throws Error(InvalidArgument) for out-of-range parameters.
void validate(const PrecisionModelSpec& spec);

struct GroundTruth {
    SymMatrix omega_star;
    SymMatrix sigma_star;
    Matrix adjacency;  // symmetric 0/1, zero diagonal
    SymMatrix q_star;
};

/// Throws Error(InfeasibleDegree) when a hub graph cannot meet min_deg.
Matrix gen_adjacency(const PrecisionModelSpec& spec);

/// Random-sign precision with Omega_jj = 1 + sum_k |A_jk| (strictly
/// diagonally dominant), its inverse, and Q* = -T* Omega* T* with
/// tau*_j = 1 / sqrt(Omega*_jj).
GroundTruth adjacency_to_precision(const Matrix& adjacency, std::uint64_t seed);

/// Adjacency and signs drawn from streams derived from spec.seed.
GroundTruth generate_truth(const PrecisionModelSpec& spec);

/// n draws from N(0, sigma): X = Z C^T with C the lower Cholesky factor and Z
/// filled row by row with standard normals. Throws Error(NotPositiveDefinite).
DataMatrix sample_gaussian(const SymMatrix& sigma, Eigen::Index n, std::uint64_t seed);

}  // namespace jpr
