#pragma once

// Seeded random inputs for property tests.

#include <random>

#include "qphase/hilbert.hpp"

namespace qphase::testing {

inline std::mt19937_64& rng()
{
    static std::mt19937_64 gen(20240917);
    return gen;
}

inline double uniform(double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng());
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols)
{
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            m(i, j) = cplx(n(rng()), n(rng()));
    return m;
}

inline Vector random_vector(Eigen::Index n)
{
    Vector v = random_matrix(n, 1).col(0);
    return v / v.norm();
}

/// Full-rank random density matrix (Ginibre ensemble).
inline Matrix random_density(Eigen::Index n)
{
    const Matrix g = random_matrix(n, n);
    Matrix r = g * g.adjoint();
    r /= r.trace();
    return 0.5 * (r + r.adjoint());
}

inline QuantumState random_state(const Layout& layout)
{
    return QuantumState::density(random_density(static_cast<Eigen::Index>(layout.size())), layout);
}

inline double max_abs(const Matrix& m)
{
    return m.cwiseAbs().maxCoeff();
}

} // namespace qphase::testing
