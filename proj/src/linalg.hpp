#pragma once

// Internal dense helpers shared by the lasso and splitting solvers.

#include "jpr/data.hpp"
#include "jpr/error.hpp"

namespace jpr::detail {

/// X^T X / n, fully populated.
inline Matrix gram_of(const Matrix& x) {
    Matrix g = Matrix::Zero(x.cols(), x.cols());
    g.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose(), 1.0 / static_cast<double>(x.rows()));
    return g.selfadjointView<Eigen::Lower>();
}

/// Gram with row and column j removed.
inline Matrix gram_without(const Matrix& gram, Eigen::Index j) {
    const Eigen::Index p = gram.rows();
    Matrix sub(p - 1, p - 1);
    for (Eigen::Index a = 0, ra = 0; a < p; ++a) {
        if (a == j) continue;
        for (Eigen::Index b = 0, rb = 0; b < p; ++b) {
            if (b == j) continue;
            sub(ra, rb++) = gram(a, b);
        }
        ++ra;
    }
    return sub;
}

inline double top_eigenvalue(const Matrix& sym) {
    if (sym.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw Error(ErrorKind::EigenFailure, "eigenvalue solver did not converge");
    }
    return es.eigenvalues().maxCoeff();
}

}  // namespace jpr::detail
