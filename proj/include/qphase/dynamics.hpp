#pragma once

// Resonator and qubit evolution: closed-form unitaries, the photon-loss master
// equation (RK4 integrator and an exact propagator), and the analytic damped
// superposition states.

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qphase/hilbert.hpp"

namespace qphase {

/// Single resonator mode. All rates in units where omega = 1 by default.
struct ResonatorParams
{
    double omega = 1.0;
    double gamma = 0.0; ///< amplitude damping rate
    double chi = 0.0;   ///< Kerr strength
    std::size_t dim = 4;

    void validate() const
    {
        if (!(omega > 0.0) || !std::isfinite(omega))
            throw InvalidArgument("resonator omega must be positive");
        if (!(gamma >= 0.0) || !std::isfinite(gamma))
            throw InvalidArgument("resonator gamma must be nonnegative");
        if (!(chi >= 0.0) || !std::isfinite(chi))
            throw InvalidArgument("resonator chi must be nonnegative");
        static_cast<void>(FockSpace(dim));
    }
};

struct QubitParams
{
    double omega0 = 1.0; ///< qubit splitting
    double g = 1.0;      ///< qubit-resonator coupling
    double rabi = 1.0;   ///< drive amplitude Omega
    double drive_phase = 0.0;
    double drive_freq = 1.0;

    void validate() const
    {
        if (!(g > 0.0))
            throw InvalidArgument("qubit coupling g must be positive");
        if (!(rabi >= 0.0))
            throw InvalidArgument("drive amplitude must be nonnegative");
    }
};

/// omega + chi (N - 1): the rate at which |N> winds relative to |0>, per photon.
inline double effective_frequency(const ResonatorParams& res, std::size_t photons)
{
    if (photons < 1)
        throw InvalidArgument("photon number must be at least 1");
    return res.omega + res.chi * static_cast<double>(photons - 1);
}

/// exp[-i (omega a^dag a + sum_j omega0_j sigma_jz / 2) t] on qubit_1 ⊗ ... ⊗ Fock.
inline Operator u_free(double t, const ResonatorParams& res, std::span<const QubitParams> qubits)
{
    res.validate();
    const Layout layout = Layout::qubits_and_fock(qubits.size(), FockSpace(res.dim));
    const std::size_t n = layout.size();
    Matrix u = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto d = layout.digits(i);
        double e = res.omega * static_cast<double>(d.back());
        for (std::size_t j = 0; j < qubits.size(); ++j)
            e += 0.5 * qubits[j].omega0 * (d[j] == kExcited ? 1.0 : -1.0);
        u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = std::exp(-kI * e * t);
    }
    return Operator(std::move(u), layout);
}

inline Operator u_free(double t, const ResonatorParams& res, std::initializer_list<QubitParams> qubits)
{
    return u_free(t, res, std::span<const QubitParams>(qubits.begin(), qubits.size()));
}

/// Resonant drive on one qubit: cos(Omega t/2) I + i sin(Omega t/2) [e^{-i phi} s+ + e^{i phi} s-].
inline Operator u_drive(const QubitParams& q, double t)
{
    const double half = 0.5 * q.rabi * t;
    const cplx ph = std::exp(-kI * q.drive_phase);
    Matrix u = std::cos(half) * identity(2) +
               kI * std::sin(half) * (ph * qubit::sigma_plus() + std::conj(ph) * qubit::sigma_minus());
    return Operator(std::move(u), Layout{2});
}

/// Resonant Jaynes-Cummings evolution exp[-i g (a s+ + a^dag s-) t] on qubit ⊗ Fock.
///
/// The pair (|e,n-1>, |g,n>) rotates at g sqrt(n); |g,0> and the truncated |e,dim-1> are untouched.
inline Operator u_jc(const QubitParams& q, double t, std::size_t dim)
{
    const FockSpace fock(dim);
    const Layout layout{2, dim};
    const std::size_t n = layout.size();
    Matrix u = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    auto idx = [&](std::size_t qb, std::size_t k) {
        return static_cast<Eigen::Index>(qb * dim + k);
    };
    u(idx(kGround, 0), idx(kGround, 0)) = 1.0;
    u(idx(kExcited, dim - 1), idx(kExcited, dim - 1)) = 1.0;
    for (std::size_t k = 1; k < fock.dim(); ++k) {
        const double theta = q.g * std::sqrt(static_cast<double>(k)) * t;
        const double c = std::cos(theta), s = std::sin(theta);
        u(idx(kGround, k), idx(kGround, k)) = c;
        u(idx(kExcited, k - 1), idx(kExcited, k - 1)) = c;
        u(idx(kGround, k), idx(kExcited, k - 1)) = -kI * s;
        u(idx(kExcited, k - 1), idx(kGround, k)) = -kI * s;
    }
    return Operator(std::move(u), layout);
}

/// exp[-i chi a^dag^2 a^2 t], diagonal with phases chi n(n-1) t.
inline Operator u_kerr(double t, const ResonatorParams& res)
{
    res.validate();
    const auto d = static_cast<Eigen::Index>(res.dim);
    Matrix u = Matrix::Zero(d, d);
    for (Eigen::Index k = 0; k < d; ++k)
        u(k, k) = std::exp(-kI * res.chi * static_cast<double>(k * (k - 1)) * t);
    return Operator(std::move(u), Layout{res.dim});
}

/// Dense lab-frame qubit ⊗ Fock Hamiltonian omega a^dag a + omega0 sz/2 + g (a s+ + a^dag s-).
inline Matrix jc_hamiltonian(const QubitParams& q, double omega, std::size_t dim)
{
    const auto [a, ad] = ladder_ops(dim);
    return kron(identity(2), omega * (ad * a).matrix()) + kron(0.5 * q.omega0 * qubit::sigma_z(), identity(dim)) +
           q.g * (kron(qubit::sigma_plus(), a.matrix()) + kron(qubit::sigma_minus(), ad.matrix()));
}

/// Dense exp(-i H t) for a Hermitian H.
inline Matrix expm_hermitian(const Matrix& h, double t)
{
    Matrix x = (-kI * t) * h;
    return x.exp();
}

/// JC evolution with detuning Delta = omega0 - omega, in the frame rotating at omega.
/// Only available through the dense exponential.
inline Operator u_jc_detuned(const QubitParams& q, double omega, double t, std::size_t dim)
{
    const auto [a, ad] = ladder_ops(dim);
    const double delta = q.omega0 - omega;
    Matrix h = kron(0.5 * delta * qubit::sigma_z(), identity(dim)) +
               q.g * (kron(qubit::sigma_plus(), a.matrix()) + kron(qubit::sigma_minus(), ad.matrix()));
    return Operator(expm_hermitian(h, t), Layout{2, dim});
}

/// Eigenpair of the JC block spanned by (|g,n>, |e,n-1>).
///
/// `lower` belongs to lambda_minus and has components (sin b, cos b); `upper`
/// belongs to lambda_plus with components (cos b, -sin b), both in the order (|g,n>, |e,n-1>).
struct DressedPair
{
    double lambda_plus = 0.0;
    double lambda_minus = 0.0;
    double sin_beta = 0.0;
    double cos_beta = 0.0;
    double delta = 0.0; ///< sqrt(Delta^2 + 4 g^2 n)
    Eigen::Vector2d upper;
    Eigen::Vector2d lower;
};

inline DressedPair dressed_states(const QubitParams& q, std::size_t n, double omega)
{
    if (n < 1)
        throw InvalidArgument("dressed states need n >= 1");
    q.validate();
    const double nn = static_cast<double>(n);
    const double det = q.omega0 - omega;
    const double coupling = 2.0 * q.g * std::sqrt(nn);
    DressedPair p;
    p.delta = std::hypot(det, coupling);
    p.lambda_plus = omega * (nn - 0.5) + 0.5 * p.delta;
    p.lambda_minus = omega * (nn - 0.5) - 0.5 * p.delta;
    const double norm = std::hypot(det + p.delta, coupling);
    p.sin_beta = -(det + p.delta) / norm;
    p.cos_beta = coupling / norm;
    p.lower = {p.sin_beta, p.cos_beta};
    p.upper = {p.cos_beta, -p.sin_beta};
    return p;
}

/// The 2x2 lab-frame JC block in the basis (|g,n>, |e,n-1>).
inline Eigen::Matrix2d jc_block(const QubitParams& q, std::size_t n, double omega)
{
    const double nn = static_cast<double>(n);
    Eigen::Matrix2d h;
    h << omega * nn - 0.5 * q.omega0, q.g * std::sqrt(nn), q.g * std::sqrt(nn), omega * (nn - 1.0) + 0.5 * q.omega0;
    return h;
}

namespace detail {

/// Fock ladder operator lifted to a layout whose last factor is the resonator.
inline Matrix lifted(const Matrix& fock_op, const Layout& layout)
{
    const std::size_t rest = layout.size() / layout.dims().back();
    return kron(identity(rest), fock_op);
}

inline void check_fock_layout(const Layout& layout, const ResonatorParams& res)
{
    if (layout.dims().back() != res.dim)
        throw DimensionMismatch("last layout factor (" + std::to_string(layout.dims().back()) +
                                ") does not match resonator dim " + std::to_string(res.dim));
}

/// (e^z - 1) without cancellation for small |z|.
inline cplx expm1(cplx z)
{
    const double x = z.real(), y = z.imag();
    const double s = std::sin(0.5 * y);
    return {std::expm1(x) * std::cos(y) - 2.0 * s * s, std::exp(x) * std::sin(y)};
}

} // namespace detail

struct LindbladOptions
{
    /// Fixed RK4 step; by default min(2 pi / (200 w_max dim), 1 / (200 gamma)).
    std::optional<double> step;
};

inline double default_lindblad_step(const ResonatorParams& res)
{
    const double dim = static_cast<double>(res.dim);
    const double w_max = res.omega + res.chi * (dim - 1.0);
    double h = 2.0 * kPi / (200.0 * w_max * dim);
    if (res.gamma > 0.0)
        h = std::min(h, 1.0 / (200.0 * res.gamma));
    return h;
}

/// RK4 integration of d rho/dt = -i[w n + chi n(n-1), rho] + gamma (2 a rho a^dag - n rho - rho n).
///
/// Any factors in front of the resonator are spectators.
inline QuantumState lindblad_evolve(const QuantumState& rho, double t, const ResonatorParams& res,
                                    const LindbladOptions& opts = {})
{
    res.validate();
    if (t < 0.0)
        throw InvalidArgument("evolution time must be nonnegative");
    const Layout& layout = rho.layout();
    detail::check_fock_layout(layout, res);

    const auto [a0, ad0] = ladder_ops(res.dim);
    const Matrix a = detail::lifted(a0.matrix(), layout);
    const Matrix ad = a.adjoint();
    const Matrix num = ad * a;
    const Matrix h = res.omega * num + res.chi * (ad * ad * a * a);
    const double gamma = res.gamma;

    auto rhs = [&](const Matrix& r) -> Matrix {
        Matrix out = -kI * (h * r - r * h);
        if (gamma > 0.0)
            out += gamma * (2.0 * a * r * ad - num * r - r * num);
        return out;
    };

    Matrix r = rho.density_matrix();
    if (t > 0.0) {
        const double h_max = opts.step.value_or(default_lindblad_step(res));
        if (!(h_max > 0.0))
            throw InvalidArgument("integrator step must be positive");
        const auto steps = static_cast<std::size_t>(std::ceil(t / h_max));
        const double dt = t / static_cast<double>(steps);
        for (std::size_t s = 0; s < steps; ++s) {
            const Matrix k1 = rhs(r);
            const Matrix k2 = rhs(r + 0.5 * dt * k1);
            const Matrix k3 = rhs(r + 0.5 * dt * k2);
            const Matrix k4 = rhs(r + dt * k3);
            r += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
    }
    return QuantumState::density(std::move(r), layout);
}

/// Exact free evolution of a Fock-block density matrix under rotation, Kerr and loss.
///
/// Each diagonal offset d decouples; along it the generator is upper bidiagonal with
/// diagonal entries in arithmetic progression, which integrates in closed form.
inline Matrix free_propagate_block(const Matrix& x, double t, double omega, double gamma, double chi)
{
    const Eigen::Index dim = x.rows();
    Matrix out = Matrix::Zero(dim, dim);
    for (Eigen::Index d = 0; d < dim; ++d) {
        const double dd = static_cast<double>(d);
        const cplx c = kI * omega * dd + kI * chi * (dd * dd - dd) - gamma * dd;
        const cplx b = 2.0 * (kI * chi * dd - gamma);
        const cplx tb = t * b;
        const cplx growth = (std::abs(tb) < 1e-300) ? cplx(t) : t * detail::expm1(tb) / tb;
        const Eigen::Index len = dim - d;
        // P(k, j) for k <= j along this offset
        for (Eigen::Index k = 0; k < len; ++k) {
            const cplx base = std::exp(t * (c + static_cast<double>(k) * b));
            cplx coef = base;
            cplx up = 0.0, lo = 0.0;
            for (Eigen::Index j = k; j < len; ++j) {
                if (j > k) {
                    const double kappa = 2.0 * gamma * std::sqrt(static_cast<double>((j) * (j + d)));
                    coef *= kappa * growth / static_cast<double>(j - k);
                }
                if (coef == cplx(0.0))
                    break;
                up += coef * x(j, j + d);
                if (d > 0)
                    lo += std::conj(coef) * x(j + d, j);
            }
            out(k, k + d) = up;
            if (d > 0)
                out(k + d, k) = lo;
        }
    }
    return out;
}

/// Free evolution of a composite state (qubits idle, resonator last) for time t.
/// `dissipative` and `kerr` switch the loss and Kerr terms on.
inline QuantumState free_evolve(const QuantumState& rho, double t, const ResonatorParams& res, bool dissipative = true,
                                bool kerr = true)
{
    res.validate();
    if (t < 0.0)
        throw InvalidArgument("evolution time must be nonnegative");
    const Layout& layout = rho.layout();
    detail::check_fock_layout(layout, res);
    const double gamma = dissipative ? res.gamma : 0.0;
    const double chi = kerr ? res.chi : 0.0;
    const auto dim = static_cast<Eigen::Index>(res.dim);
    const auto blocks = static_cast<Eigen::Index>(layout.size()) / dim;

    if (rho.is_pure() && gamma == 0.0) {
        Vector v = rho.vector();
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            const double n = static_cast<double>(i % dim);
            v(i) *= std::exp(-kI * (res.omega * n + chi * n * (n - 1.0)) * t);
        }
        return QuantumState::pure(std::move(v), layout);
    }

    const Matrix r = rho.density_matrix();
    Matrix out(r.rows(), r.cols());
    for (Eigen::Index p = 0; p < blocks; ++p)
        for (Eigen::Index q = 0; q < blocks; ++q)
            out.block(p * dim, q * dim, dim, dim) =
                free_propagate_block(r.block(p * dim, q * dim, dim, dim), t, res.omega, gamma, chi);
    out = 0.5 * (out + out.adjoint());
    return QuantumState::density(std::move(out), layout);
}

/// Closed-form damped state of (|0> + e^{i phase0}|1>)/sqrt 2 after time tau.
inline QuantumState damped_superposition_single(double tau, const ResonatorParams& res, double phase0 = 0.0)
{
    res.validate();
    if (tau < 0.0)
        throw InvalidArgument("tau must be nonnegative");
    const auto d = static_cast<Eigen::Index>(res.dim);
    Matrix r = Matrix::Zero(d, d);
    const double p1 = 0.5 * std::exp(-2.0 * res.gamma * tau);
    r(0, 0) = 1.0 - p1;
    r(1, 1) = p1;
    r(0, 1) = 0.5 * std::exp(-res.gamma * tau) * std::exp(kI * (res.omega * tau - phase0));
    r(1, 0) = std::conj(r(0, 1));
    return QuantumState::density(std::move(r), Layout{res.dim});
}

/// Closed-form damped state of (|0> + e^{i phase0}|N>)/sqrt 2 after time tau, Kerr included.
inline QuantumState damped_superposition_multi(std::size_t photons, double tau, const ResonatorParams& res,
                                               double phase0 = 0.0)
{
    res.validate();
    if (photons < 1)
        throw InvalidArgument("photon number must be at least 1");
    if (res.dim <= photons)
        throw TruncationError("Fock dim " + std::to_string(res.dim) + " cannot hold " + std::to_string(photons) +
                              " photons");
    if (tau < 0.0)
        throw InvalidArgument("tau must be nonnegative");
    const auto d = static_cast<Eigen::Index>(res.dim);
    const auto n = static_cast<Eigen::Index>(photons);
    Matrix r = Matrix::Zero(d, d);
    const double keep = std::exp(-2.0 * res.gamma * tau);
    const double lose = -std::expm1(-2.0 * res.gamma * tau);
    r(0, 0) = 0.5;
    double binom = 1.0;
    for (Eigen::Index k = 0; k <= n; ++k) {
        r(k, k) += 0.5 * binom * std::pow(keep, static_cast<double>(k)) * std::pow(lose, static_cast<double>(n - k));
        binom = binom * static_cast<double>(n - k) / static_cast<double>(k + 1);
    }
    const double wt = effective_frequency(res, photons);
    const double nn = static_cast<double>(photons);
    r(0, n) = 0.5 * std::exp(-res.gamma * nn * tau) * std::exp(kI * (wt * nn * tau - phase0));
    r(n, 0) = std::conj(r(0, n));
    return QuantumState::density(std::move(r), Layout{res.dim});
}

} // namespace qphase
