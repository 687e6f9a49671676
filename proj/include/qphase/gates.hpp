#pragma once

// Two-qubit CNOT (control = qubit 1, target = qubit 2) as a CPTP channel.
//
// Two-qubit basis index = 2 * q1 + q2, i.e. gg = 0, ge = 1, eg = 2, ee = 3.
// Choi matrix convention: J = sum_ij |i><j| ⊗ E(|i><j|), row index 4 * in + out.

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "qphase/hilbert.hpp"

namespace qphase {

struct CouplerParams
{
    double lambda = 0.05; ///< qubit-qubit coupling strength
    double t_c = 0.0;     ///< CNOT duration (bookkeeping only)

    void validate() const
    {
        if (!(lambda > 0.0))
            throw InvalidArgument("coupler lambda must be positive");
        if (!(t_c >= 0.0))
            throw InvalidArgument("CNOT duration must be nonnegative");
    }
};

/// lambda (s1+ s2- + s1- s2+) on qubit 1 ⊗ qubit 2.
inline Matrix qubit_coupling_hamiltonian(double lambda)
{
    return lambda * (kron(qubit::sigma_plus(), qubit::sigma_minus()) + kron(qubit::sigma_minus(), qubit::sigma_plus()));
}

/// Duration pi / (4 lambda) of one coupling segment in the iSWAP-based CNOT.
inline double iswap_cnot_time(const CouplerParams& coupler)
{
    coupler.validate();
    return kPi / (4.0 * coupler.lambda);
}

/// Two-qubit index of the alternative labelling |0>=gg, |1>=ge, |2>=ee, |3>=eg.
inline std::size_t cnot_label_index(std::size_t label)
{
    static constexpr std::array<std::size_t, 4> map{0, 1, 3, 2};
    if (label > 3)
        throw OutOfRange("CNOT basis label must be 0..3");
    return map[label];
}

inline Matrix cnot_unitary()
{
    Matrix u = Matrix::Zero(4, 4);
    u(0, 0) = 1.0;
    u(1, 1) = 1.0;
    u(3, 2) = 1.0;
    u(2, 3) = 1.0;
    return u;
}

class CnotChannel
{
public:
    static CnotChannel ideal() { return CnotChannel(1.0, Matrix::Zero(16, 16), {cnot_unitary()}); }

    /// Ideal CNOT with probability epsilon; otherwise the target lands flipped
    /// relative to the ideal image and the coherence is lost.
    ///
    /// `residuals` (16x16, Choi index convention, default zero) perturbs the Choi
    /// matrix. The result is projected back onto CPTP maps by clipping negative
    /// eigenvalues and renormalising the input marginal.
    static CnotChannel imperfect(double epsilon, const Matrix& residuals = Matrix())
    {
        if (!(epsilon > 0.0 && epsilon <= 1.0))
            throw InvalidArgument("CNOT quality epsilon must lie in (0, 1], got " + std::to_string(epsilon));
        const Matrix u = cnot_unitary();
        std::vector<Matrix> kraus{std::sqrt(epsilon) * u};
        if (epsilon < 1.0) {
            for (Eigen::Index i = 0; i < 4; ++i) {
                Eigen::Index image = 0;
                u.col(i).cwiseAbs().maxCoeff(&image);
                Matrix k = Matrix::Zero(4, 4);
                k(image ^ 1, i) = std::sqrt(1.0 - epsilon);
                kraus.push_back(std::move(k));
            }
        }
        if (residuals.size() == 0 || residuals.isZero(0.0))
            return CnotChannel(epsilon, Matrix::Zero(16, 16), std::move(kraus));

        if (residuals.rows() != 16 || residuals.cols() != 16)
            throw DimensionMismatch("CNOT residual matrix must be 16x16");
        if (residuals.cwiseAbs().maxCoeff() > 0.1 * epsilon)
            throw InvalidArgument("CNOT residual weights must be small compared with epsilon");
        const Matrix j = choi_from_kraus(kraus) + 0.5 * (residuals + residuals.adjoint());
        return CnotChannel(epsilon, residuals, kraus_from_choi(project_cptp(j)));
    }

    double epsilon() const noexcept { return epsilon_; }
    const Matrix& residuals() const noexcept { return residuals_; }
    const std::vector<Matrix>& kraus() const noexcept { return kraus_; }
    bool is_unitary() const noexcept { return kraus_.size() == 1; }

    Matrix choi() const { return choi_from_kraus(kraus_); }

    /// max |sum K^dag K - I|
    double completeness_defect() const
    {
        Matrix s = Matrix::Zero(4, 4);
        for (const auto& k : kraus_)
            s += k.adjoint() * k;
        return (s - identity(4)).cwiseAbs().maxCoeff();
    }

    /// E(rho) for a 4x4 two-qubit operator.
    Matrix apply(const Matrix& rho) const
    {
        Matrix out = Matrix::Zero(4, 4);
        for (const auto& k : kraus_)
            out += k * rho * k.adjoint();
        return out;
    }

    static Matrix choi_from_kraus(const std::vector<Matrix>& kraus)
    {
        Matrix j = Matrix::Zero(16, 16);
        for (const auto& k : kraus) {
            Vector v(16);
            for (Eigen::Index i = 0; i < 4; ++i)
                for (Eigen::Index o = 0; o < 4; ++o)
                    v(4 * i + o) = k(o, i);
            j += v * v.adjoint();
        }
        return j;
    }

    static std::vector<Matrix> kraus_from_choi(const Matrix& j)
    {
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (j + j.adjoint()));
        std::vector<Matrix> kraus;
        for (Eigen::Index m = 15; m >= 0; --m) {
            const double lam = es.eigenvalues()(m);
            if (lam <= 1e-14)
                continue;
            Matrix k(4, 4);
            for (Eigen::Index i = 0; i < 4; ++i)
                for (Eigen::Index o = 0; o < 4; ++o)
                    k(o, i) = std::sqrt(lam) * es.eigenvectors()(4 * i + o, m);
            kraus.push_back(std::move(k));
        }
        return kraus;
    }

private:
    CnotChannel(double epsilon, Matrix residuals, std::vector<Matrix> kraus)
        : epsilon_(epsilon), residuals_(std::move(residuals)), kraus_(std::move(kraus))
    {
    }

    static Matrix project_cptp(const Matrix& j)
    {
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (j + j.adjoint()));
        const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
        Matrix p = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
        Matrix t = Matrix::Zero(4, 4);
        for (Eigen::Index i = 0; i < 4; ++i)
            for (Eigen::Index k = 0; k < 4; ++k)
                for (Eigen::Index o = 0; o < 4; ++o)
                    t(i, k) += p(4 * i + o, 4 * k + o);
        Eigen::SelfAdjointEigenSolver<Matrix> ts(0.5 * (t + t.adjoint()));
        const Matrix t_inv_sqrt = ts.eigenvectors() * ts.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                                  ts.eigenvectors().adjoint();
        const Matrix s = kron(t_inv_sqrt, identity(4));
        return s * p * s.adjoint();
    }

    double epsilon_;
    Matrix residuals_;
    std::vector<Matrix> kraus_;
};

inline CnotChannel ideal_cnot() { return CnotChannel::ideal(); }

inline CnotChannel imperfect_cnot(double epsilon, const Matrix& residuals = Matrix())
{
    return CnotChannel::imperfect(epsilon, residuals);
}

/// Apply the channel to the leading qubit pair of a state; later factors are untouched.
inline QuantumState apply_channel(const CnotChannel& ch, const QuantumState& rho)
{
    const Layout& layout = rho.layout();
    if (layout.subsystems() < 2 || layout.dim(0) != 2 || layout.dim(1) != 2)
        throw DimensionMismatch("CNOT channel needs a layout starting with two qubits");
    const std::size_t rest = layout.size() / 4;
    if (ch.is_unitary() && rho.is_pure()) {
        const Matrix u = kron(ch.kraus().front(), identity(rest));
        return QuantumState::pure(u * rho.vector(), layout);
    }
    const Matrix r = rho.density_matrix();
    Matrix out = Matrix::Zero(r.rows(), r.cols());
    for (const auto& k : ch.kraus()) {
        const Matrix kk = kron(k, identity(rest));
        out += kk * r * kk.adjoint();
    }
    out = 0.5 * (out + out.adjoint());
    return QuantumState::density(std::move(out), layout);
}

} // namespace qphase
