#include <catch_amalgamated.hpp>

#include "qphase/hilbert.hpp"
#include "support.hpp"

using namespace qphase;
using namespace qphase::testing;
using Catch::Approx;

TEST_CASE("fock_state places a single unit amplitude", "[hilbert]")
{
    const auto s0 = fock_state(0, 4);
    const auto s3 = fock_state(3, 4);
    Vector e0 = Vector::Zero(4), e3 = Vector::Zero(4);
    e0(0) = 1.0;
    e3(3) = 1.0;
    CHECK(s0.vector() == e0);
    CHECK(s3.vector() == e3);
    CHECK_THROWS_AS(fock_state(4, 4), OutOfRange);
    CHECK_THROWS_AS(fock_state(0, 1), InvalidArgument);
}

TEST_CASE("ladder operators", "[hilbert]")
{
    {
        const auto [a, ad] = ladder_ops(2);
        Matrix expect(2, 2);
        expect << 0, 1, 0, 0;
        CHECK(a.matrix() == expect);
    }
    const auto [a, ad] = ladder_ops(3);
    const Matrix n = (ad * a).matrix();
    CHECK(max_abs(n - Matrix(Eigen::Vector3cd(0, 1, 2).asDiagonal())) < 1e-14);

    const Vector v = a.matrix() * fock_state(2, 3).vector();
    CHECK(std::abs(v(1) - std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(v(0)) == 0.0);
    CHECK(std::abs(v(2)) == 0.0);

    CHECK_THROWS_AS(ladder_ops(1), InvalidArgument);
}

TEST_CASE("truncated commutator has the corner defect", "[hilbert][property]")
{
    for (std::size_t dim = 2; dim <= 12; ++dim) {
        const auto [a, ad] = ladder_ops(dim);
        const Matrix comm = (ad * a).matrix() - (a * ad).matrix();
        Matrix expect = -identity(dim);
        expect(dim - 1, dim - 1) = static_cast<double>(dim - 1);
        CHECK(max_abs(comm - expect) < 1e-14);
    }
}

TEST_CASE("tensor products", "[hilbert]")
{
    const Operator i2(identity(2), Layout{2});
    CHECK(tensor({i2, i2}).matrix() == identity(4));

    const Operator sz(qubit::sigma_z(), Layout{2});
    const Operator z1 = tensor({sz, i2});
    const auto eg = basis_state(Layout{2, 2}, {kExcited, kGround});
    const Vector out = z1.matrix() * eg.vector();
    CHECK(max_abs(out - eg.vector()) == 0.0);

    const Operator i5(identity(5), Layout{5});
    const Operator big = tensor({i2, i2, i5});
    CHECK(big.matrix().rows() == 20);
    CHECK(big.space() == Layout({2, 2, 5}));
}

TEST_CASE("tensor is multiplicative on random factors", "[hilbert][property]")
{
    for (int trial = 0; trial < 20; ++trial) {
        const Operator a(random_matrix(2, 2), Layout{2}), c(random_matrix(2, 2), Layout{2});
        const Operator b(random_matrix(3, 3), Layout{3}), d(random_matrix(3, 3), Layout{3});
        const Matrix lhs = (tensor({a, b}) * tensor({c, d})).matrix();
        const Matrix rhs = tensor({a * c, b * d}).matrix();
        CHECK(max_abs(lhs - rhs) < 1e-12);
    }
}

TEST_CASE("state validation", "[hilbert]")
{
    Vector v(2);
    v << 1.0, 1.0;
    CHECK_THROWS_AS(QuantumState::pure(v, Layout{2}), InvalidArgument);
    CHECK_THROWS_AS(QuantumState::pure(Vector::Ones(1), Layout{2}), DimensionMismatch);

    Matrix r(2, 2);
    r << 0.5, 0.1, 0.2, 0.5;
    CHECK_THROWS_AS(QuantumState::density(r, Layout{2}), InvalidArgument);
    r << 1.2, 0.0, 0.0, -0.2;
    CHECK_THROWS_AS(QuantumState::density(r, Layout{2}), InvalidArgument);
    r << 0.6, 0.0, 0.0, 0.6;
    CHECK_THROWS_AS(QuantumState::density(r, Layout{2}), InvalidArgument);
    r << 0.5, 0.5, 0.5, 0.5;
    CHECK_NOTHROW(QuantumState::density(r, Layout{2}));
}

TEST_CASE("fidelity", "[hilbert]")
{
    const Layout l{2, 3};
    const auto psi = QuantumState::pure(random_vector(6), l);
    CHECK(fidelity(psi, psi) == Approx(1.0).margin(1e-14));
    CHECK(fidelity(basis_state(l, {0, 1}), basis_state(l, {1, 1})) == 0.0);

    const auto phased = QuantumState::pure(std::exp(kI * 0.7) * psi.vector(), l);
    CHECK(fidelity(psi, phased) == Approx(1.0).margin(1e-14));

    // mixed paths agree with the pure one
    const auto other = QuantumState::pure(random_vector(6), l);
    const double f = fidelity(psi, other);
    CHECK(fidelity(psi.to_density(), other) == Approx(f).margin(1e-12));
    CHECK(fidelity(psi.to_density(), other.to_density()) == Approx(f).margin(1e-7));

    CHECK_THROWS_AS(fidelity(psi, fock_state(0, 6)), DimensionMismatch);
}

TEST_CASE("partial trace", "[hilbert]")
{
    const Layout qf{2, 3};
    const auto g1 = basis_state(qf, {kGround, 1});
    const auto red = partial_trace(g1, {0});
    Matrix gg = Matrix::Zero(2, 2);
    gg(0, 0) = 1.0;
    CHECK(max_abs(red.density_matrix() - gg) < 1e-15);

    Vector bell = Vector::Zero(6);
    bell(qf.index(std::vector<std::size_t>{kGround, 0})) = 1.0 / std::sqrt(2.0);
    bell(qf.index(std::vector<std::size_t>{kExcited, 1})) = 1.0 / std::sqrt(2.0);
    const auto mixed = partial_trace(QuantumState::pure(bell, qf), {0});
    CHECK(max_abs(mixed.density_matrix() - 0.5 * identity(2)) < 1e-15);

    const Matrix rf = random_density(3);
    const auto prod = QuantumState::density(kron(gg, rf), qf);
    CHECK(max_abs(partial_trace(prod, {1}).density_matrix() - rf) < 1e-15);

    CHECK_THROWS_AS(partial_trace(prod, {2}), OutOfRange);
    CHECK_THROWS_AS(partial_trace(prod, {}), InvalidArgument);
}

TEST_CASE("partial trace preserves trace and keeps everything on request", "[hilbert][property]")
{
    const Layout l{2, 2, 4};
    for (int trial = 0; trial < 10; ++trial) {
        const auto rho = random_state(l);
        CHECK(max_abs(partial_trace(rho, {0, 1, 2}).density_matrix() - rho.density_matrix()) < 1e-15);
        const std::vector<std::vector<std::size_t>> subsets{{0}, {1}, {2}, {0, 2}, {1, 2}};
        for (const auto& keep : subsets) {
            const auto red = partial_trace(rho, keep);
            CHECK(std::abs(red.density_matrix().trace() - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("embed matches explicit tensor products", "[hilbert][property]")
{
    const Layout l{2, 2, 3};
    const Matrix a = random_matrix(2, 2);
    const Matrix f = random_matrix(3, 3);
    CHECK(max_abs(embed(a, l, {1}).matrix() - kron(kron(identity(2), a), identity(3))) < 1e-15);
    // operator on (qubit 1, Fock) in that order
    const Matrix af = kron(a, f);
    CHECK(max_abs(embed(af, l, {0, 2}).matrix() - kron(kron(a, identity(2)), f)) < 1e-14);
    // reversed target order swaps the factor roles
    const Matrix b = random_matrix(2, 2);
    CHECK(max_abs(embed(kron(a, b), l, {1, 0}).matrix() - kron(kron(b, a), identity(3))) < 1e-14);
    CHECK_THROWS_AS(embed(a, l, {2}), DimensionMismatch);
    CHECK_THROWS_AS(embed(af, l, {0, 0}), InvalidArgument);
}

TEST_CASE("trace distance", "[hilbert]")
{
    const auto a = basis_state(Layout{2}, {0});
    const auto b = basis_state(Layout{2}, {1});
    CHECK(trace_distance(a, b) == Approx(1.0));
    CHECK(trace_distance(a, a) == 0.0);
}
