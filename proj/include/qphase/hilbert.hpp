#pragma once

// Dense complex linear algebra over qubit ⊗ ... ⊗ Fock composite spaces.
//
// Basis conventions used throughout the library:
//   qubit index 0 = |g>, index 1 = |e>, sigma_z|e> = +|e>;
//   composite index = row-major over the layout (last factor fastest).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qphase/errors.hpp"

namespace qphase {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr cplx kI{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

inline constexpr std::size_t kGround = 0;
inline constexpr std::size_t kExcited = 1;

/// Validation tolerances for states.
namespace tolerance {
inline constexpr double norm = 1e-10;
inline constexpr double hermiticity = 1e-10;
inline constexpr double positivity = 1e-9;
inline constexpr double trace = 1e-10;
} // namespace tolerance

/// Truncated single-mode Fock space spanned by |0>, ..., |dim-1>.
class FockSpace
{
public:
    explicit FockSpace(std::size_t dim) : dim_(dim)
    {
        if (dim < 2)
            throw InvalidArgument("Fock dimension must be at least 2, got " + std::to_string(dim));
    }

    std::size_t dim() const noexcept { return dim_; }
    std::size_t top_level() const noexcept { return dim_ - 1; }

    bool operator==(const FockSpace&) const = default;

private:
    std::size_t dim_;
};

/// Ordered subsystem dimensions of a composite space.
class Layout
{
public:
    Layout() = default;

    explicit Layout(std::vector<std::size_t> dims) : dims_(std::move(dims))
    {
        if (dims_.empty())
            throw InvalidArgument("layout needs at least one subsystem");
        for (auto d : dims_)
            if (d == 0)
                throw InvalidArgument("subsystem dimension must be positive");
    }

    Layout(std::initializer_list<std::size_t> dims) : Layout(std::vector<std::size_t>(dims)) {}

    /// `qubits` two-level factors followed by one Fock factor.
    static Layout qubits_and_fock(std::size_t qubits, const FockSpace& fock)
    {
        std::vector<std::size_t> dims(qubits, 2);
        dims.push_back(fock.dim());
        return Layout(std::move(dims));
    }

    std::size_t size() const noexcept
    {
        return std::accumulate(dims_.begin(), dims_.end(), std::size_t{1}, std::multiplies<>());
    }
    std::size_t subsystems() const noexcept { return dims_.size(); }
    std::size_t dim(std::size_t subsystem) const { return dims_.at(subsystem); }
    const std::vector<std::size_t>& dims() const noexcept { return dims_; }

    Layout concat(const Layout& other) const
    {
        auto dims = dims_;
        dims.insert(dims.end(), other.dims_.begin(), other.dims_.end());
        return Layout(std::move(dims));
    }

    std::vector<std::size_t> digits(std::size_t index) const
    {
        std::vector<std::size_t> out(dims_.size());
        for (std::size_t k = dims_.size(); k-- > 0;) {
            out[k] = index % dims_[k];
            index /= dims_[k];
        }
        return out;
    }

    std::size_t index(std::span<const std::size_t> digits) const
    {
        if (digits.size() != dims_.size())
            throw DimensionMismatch("digit count does not match layout");
        std::size_t idx = 0;
        for (std::size_t k = 0; k < dims_.size(); ++k) {
            if (digits[k] >= dims_[k])
                throw OutOfRange("basis digit out of range");
            idx = idx * dims_[k] + digits[k];
        }
        return idx;
    }

    bool operator==(const Layout&) const = default;

private:
    std::vector<std::size_t> dims_;
};

inline Matrix identity(std::size_t n)
{
    return Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
}

inline Matrix kron(const Matrix& a, const Matrix& b)
{
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// Largest |A - A^dagger| entry.
inline double hermiticity_defect(const Matrix& a)
{
    return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

/// Smallest eigenvalue of the Hermitian part of `a`.
inline double min_eigenvalue(const Matrix& a)
{
    Matrix h = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

/// Square root of a positive semidefinite Hermitian matrix (negative noise clipped).
inline Matrix psd_sqrt(const Matrix& a)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.adjoint()));
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

namespace qubit {

inline Matrix sigma_z()
{
    Matrix m = Matrix::Zero(2, 2);
    m(kGround, kGround) = -1.0;
    m(kExcited, kExcited) = 1.0;
    return m;
}

/// |e><g|
inline Matrix sigma_plus()
{
    Matrix m = Matrix::Zero(2, 2);
    m(kExcited, kGround) = 1.0;
    return m;
}

/// |g><e|
inline Matrix sigma_minus() { return sigma_plus().adjoint(); }

inline Matrix sigma_x() { return sigma_plus() + sigma_minus(); }

} // namespace qubit

/// Square matrix tagged with the composite space it acts on.
class Operator
{
public:
    Operator(Matrix matrix, Layout space) : matrix_(std::move(matrix)), space_(std::move(space))
    {
        const auto n = static_cast<Eigen::Index>(space_.size());
        if (matrix_.rows() != n || matrix_.cols() != n)
            throw DimensionMismatch("operator is " + std::to_string(matrix_.rows()) + "x" +
                                    std::to_string(matrix_.cols()) + " but its space has dimension " +
                                    std::to_string(n));
    }

    const Matrix& matrix() const noexcept { return matrix_; }
    const Layout& space() const noexcept { return space_; }
    std::size_t dim() const noexcept { return space_.size(); }

    Operator adjoint() const { return Operator(matrix_.adjoint(), space_); }

    Operator operator*(const Operator& rhs) const
    {
        if (space_ != rhs.space_)
            throw DimensionMismatch("operator product across different spaces");
        return Operator(matrix_ * rhs.matrix_, space_);
    }

    /// max |U^dagger U - 1|
    double unitarity_defect() const
    {
        return (matrix_.adjoint() * matrix_ - identity(dim())).cwiseAbs().maxCoeff();
    }

private:
    Matrix matrix_;
    Layout space_;
};

/// Pure state vector or density matrix over a composite layout.
class QuantumState
{
public:
    enum class Representation { pure, density };

    static QuantumState pure(Vector amplitudes, Layout layout)
    {
        if (static_cast<std::size_t>(amplitudes.size()) != layout.size())
            throw DimensionMismatch("state vector length does not match layout");
        const double n = amplitudes.norm();
        if (std::abs(n - 1.0) > tolerance::norm)
            throw InvalidArgument("state vector is not normalised (norm " + std::to_string(n) + ")");
        QuantumState s;
        s.rep_ = Representation::pure;
        s.vec_ = std::move(amplitudes);
        s.layout_ = std::move(layout);
        return s;
    }

    static QuantumState density(Matrix rho, Layout layout)
    {
        const auto n = static_cast<Eigen::Index>(layout.size());
        if (rho.rows() != n || rho.cols() != n)
            throw DimensionMismatch("density matrix size does not match layout");
        if (const double h = hermiticity_defect(rho); h > tolerance::hermiticity)
            throw InvalidArgument("density matrix is not Hermitian (defect " + std::to_string(h) + ")");
        if (const double t = std::abs(rho.trace() - 1.0); t > tolerance::trace)
            throw InvalidArgument("density matrix trace deviates from 1 by " + std::to_string(t));
        if (const double m = min_eigenvalue(rho); m < -tolerance::positivity)
            throw InvalidArgument("density matrix has negative eigenvalue " + std::to_string(m));
        QuantumState s;
        s.rep_ = Representation::density;
        s.rho_ = std::move(rho);
        s.layout_ = std::move(layout);
        return s;
    }

    Representation representation() const noexcept { return rep_; }
    bool is_pure() const noexcept { return rep_ == Representation::pure; }
    const Layout& layout() const noexcept { return layout_; }
    std::size_t dim() const noexcept { return layout_.size(); }

    const Vector& vector() const
    {
        if (!is_pure())
            throw InvalidArgument("state is a density matrix, not a vector");
        return vec_;
    }

    Matrix density_matrix() const { return is_pure() ? Matrix(vec_ * vec_.adjoint()) : rho_; }

    QuantumState to_density() const
    {
        if (!is_pure())
            return *this;
        QuantumState s;
        s.rep_ = Representation::density;
        s.rho_ = vec_ * vec_.adjoint();
        s.layout_ = layout_;
        return s;
    }

    QuantumState evolved(const Operator& u) const
    {
        if (u.space() != layout_)
            throw DimensionMismatch("operator and state live on different spaces");
        QuantumState s = *this;
        if (is_pure())
            s.vec_ = u.matrix() * vec_;
        else
            s.rho_ = u.matrix() * rho_ * u.matrix().adjoint();
        return s;
    }

    /// Diagonal of the density matrix.
    Eigen::VectorXd populations() const
    {
        return is_pure() ? Eigen::VectorXd(vec_.cwiseAbs2()) : Eigen::VectorXd(rho_.diagonal().real());
    }

private:
    QuantumState() = default;

    Representation rep_ = Representation::pure;
    Vector vec_;
    Matrix rho_;
    Layout layout_;
};

/// Basis state |n> of a truncated Fock space.
inline QuantumState fock_state(std::size_t n, std::size_t dim)
{
    const FockSpace space(dim);
    if (n >= space.dim())
        throw OutOfRange("Fock level " + std::to_string(n) + " outside truncation dim " + std::to_string(dim));
    Vector v = Vector::Zero(static_cast<Eigen::Index>(dim));
    v(static_cast<Eigen::Index>(n)) = 1.0;
    return QuantumState::pure(std::move(v), Layout{dim});
}

/// Computational basis state of a composite layout, given one digit per subsystem.
inline QuantumState basis_state(const Layout& layout, std::span<const std::size_t> digits)
{
    Vector v = Vector::Zero(static_cast<Eigen::Index>(layout.size()));
    v(static_cast<Eigen::Index>(layout.index(digits))) = 1.0;
    return QuantumState::pure(std::move(v), layout);
}

inline QuantumState basis_state(const Layout& layout, std::initializer_list<std::size_t> digits)
{
    return basis_state(layout, std::span<const std::size_t>(digits.begin(), digits.size()));
}

/// Annihilation and creation operators (a, a^dagger) on a truncated Fock space.
inline std::pair<Operator, Operator> ladder_ops(std::size_t dim)
{
    const FockSpace space(dim);
    Matrix a = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t n = 1; n < space.dim(); ++n)
        a(static_cast<Eigen::Index>(n - 1), static_cast<Eigen::Index>(n)) = std::sqrt(static_cast<double>(n));
    Layout layout{dim};
    Matrix ad = a.adjoint();
    return {Operator(std::move(a), layout), Operator(std::move(ad), layout)};
}

inline Operator number_op(std::size_t dim)
{
    const FockSpace space(dim);
    Matrix n = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t k = 0; k < space.dim(); ++k)
        n(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = static_cast<double>(k);
    return Operator(std::move(n), Layout{dim});
}

/// Kronecker product in the order given (first factor = most significant).
inline Operator tensor(std::span<const Operator> factors)
{
    if (factors.size() < 2)
        throw InvalidArgument("tensor product needs at least two factors");
    Matrix m = factors[0].matrix();
    Layout layout = factors[0].space();
    for (std::size_t k = 1; k < factors.size(); ++k) {
        m = kron(m, factors[k].matrix());
        layout = layout.concat(factors[k].space());
    }
    return Operator(std::move(m), std::move(layout));
}

inline Operator tensor(std::initializer_list<Operator> factors)
{
    return tensor(std::span<const Operator>(factors.begin(), factors.size()));
}

/// Product state of the given factors.
inline QuantumState product_state(std::span<const QuantumState> factors)
{
    if (factors.empty())
        throw InvalidArgument("product state needs at least one factor");
    bool all_pure = std::all_of(factors.begin(), factors.end(), [](const auto& s) { return s.is_pure(); });
    Layout layout = factors[0].layout();
    if (all_pure) {
        Matrix v = factors[0].vector();
        for (std::size_t k = 1; k < factors.size(); ++k) {
            v = kron(v, factors[k].vector());
            layout = layout.concat(factors[k].layout());
        }
        return QuantumState::pure(Vector(v.col(0)), std::move(layout));
    }
    Matrix rho = factors[0].density_matrix();
    for (std::size_t k = 1; k < factors.size(); ++k) {
        rho = kron(rho, factors[k].density_matrix());
        layout = layout.concat(factors[k].layout());
    }
    return QuantumState::density(std::move(rho), std::move(layout));
}

inline QuantumState product_state(std::initializer_list<QuantumState> factors)
{
    return product_state(std::span<const QuantumState>(factors.begin(), factors.size()));
}

/// Lift `op`, acting on the listed subsystems (in its own factor order), to the full layout.
inline Operator embed(const Matrix& op, const Layout& layout, std::span<const std::size_t> targets)
{
    std::size_t local = 1;
    for (std::size_t k = 0; k < targets.size(); ++k) {
        if (targets[k] >= layout.subsystems())
            throw OutOfRange("embed target subsystem out of range");
        for (std::size_t j = 0; j < k; ++j)
            if (targets[j] == targets[k])
                throw InvalidArgument("embed targets must be distinct");
        local *= layout.dim(targets[k]);
    }
    if (static_cast<std::size_t>(op.rows()) != local || static_cast<std::size_t>(op.cols()) != local)
        throw DimensionMismatch("embedded operator size does not match target subsystems");

    const std::size_t n = layout.size();
    // local index of each composite basis state, and the composite index with targets zeroed
    std::vector<std::size_t> local_idx(n), rest_idx(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto d = layout.digits(i);
        std::size_t l = 0;
        for (auto t : targets) {
            l = l * layout.dim(t) + d[t];
            d[t] = 0;
        }
        local_idx[i] = l;
        rest_idx[i] = layout.index(d);
    }
    Matrix full = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (rest_idx[i] == rest_idx[j])
                full(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    op(static_cast<Eigen::Index>(local_idx[i]), static_cast<Eigen::Index>(local_idx[j]));
    return Operator(std::move(full), layout);
}

inline Operator embed(const Matrix& op, const Layout& layout, std::initializer_list<std::size_t> targets)
{
    return embed(op, layout, std::span<const std::size_t>(targets.begin(), targets.size()));
}

/// Reduced density matrix over the kept subsystems (kept in layout order).
inline QuantumState partial_trace(const QuantumState& state, std::vector<std::size_t> keep)
{
    const Layout& layout = state.layout();
    std::sort(keep.begin(), keep.end());
    if (std::adjacent_find(keep.begin(), keep.end()) != keep.end())
        throw InvalidArgument("partial_trace: repeated subsystem index");
    if (keep.empty())
        throw InvalidArgument("partial_trace: nothing to keep");
    for (auto k : keep)
        if (k >= layout.subsystems())
            throw OutOfRange("partial_trace: subsystem index " + std::to_string(k) + " out of range");

    std::vector<std::size_t> kept_dims, traced;
    for (std::size_t s = 0; s < layout.subsystems(); ++s) {
        if (std::binary_search(keep.begin(), keep.end(), s))
            kept_dims.push_back(layout.dim(s));
        else
            traced.push_back(s);
    }
    Layout out_layout(kept_dims);
    const Matrix rho = state.density_matrix();

    const std::size_t n = layout.size();
    std::vector<std::size_t> kept_idx(n), traced_idx(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto d = layout.digits(i);
        std::size_t kidx = 0, tidx = 0;
        for (auto s : keep)
            kidx = kidx * layout.dim(s) + d[s];
        for (auto s : traced)
            tidx = tidx * layout.dim(s) + d[s];
        kept_idx[i] = kidx;
        traced_idx[i] = tidx;
    }
    const auto m = static_cast<Eigen::Index>(out_layout.size());
    Matrix out = Matrix::Zero(m, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (traced_idx[i] == traced_idx[j])
                out(static_cast<Eigen::Index>(kept_idx[i]), static_cast<Eigen::Index>(kept_idx[j])) +=
                    rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    return QuantumState::density(std::move(out), std::move(out_layout));
}

/// |<a|b>|^2 for pure states, <psi|rho|psi> for mixed/pure, Uhlmann fidelity otherwise.
inline double fidelity(const QuantumState& a, const QuantumState& b)
{
    if (a.layout() != b.layout())
        throw DimensionMismatch("fidelity between states on different spaces");
    double f = 0.0;
    if (a.is_pure() && b.is_pure()) {
        f = std::norm(a.vector().dot(b.vector()));
    } else if (a.is_pure() || b.is_pure()) {
        const Vector& psi = a.is_pure() ? a.vector() : b.vector();
        const Matrix rho = a.is_pure() ? b.density_matrix() : a.density_matrix();
        f = std::real(psi.dot(rho * psi));
    } else {
        const Matrix sa = psd_sqrt(a.density_matrix());
        const Matrix inner = sa * b.density_matrix() * sa;
        const double t = std::real(psd_sqrt(inner).trace());
        f = t * t;
    }
    return std::clamp(f, 0.0, 1.0);
}

/// Half the trace norm of the difference.
inline double trace_distance(const Matrix& a, const Matrix& b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionMismatch("trace distance between matrices of different size");
    const Matrix d = a - b;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

inline double trace_distance(const QuantumState& a, const QuantumState& b)
{
    if (a.layout() != b.layout())
        throw DimensionMismatch("trace distance between states on different spaces");
    return trace_distance(a.density_matrix(), b.density_matrix());
}

/// Total population with `subsystem` in `level`.
inline double population(const QuantumState& state, std::size_t subsystem, std::size_t level)
{
    const Layout& layout = state.layout();
    if (subsystem >= layout.subsystems() || level >= layout.dim(subsystem))
        throw OutOfRange("population: subsystem or level out of range");
    const Eigen::VectorXd p = state.populations();
    double total = 0.0;
    for (std::size_t i = 0; i < layout.size(); ++i)
        if (layout.digits(i)[subsystem] == level)
            total += p(static_cast<Eigen::Index>(i));
    return total;
}

} // namespace qphase
