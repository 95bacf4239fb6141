#include <bispectra/eigensolve.hpp>
#include <bispectra/operators.hpp>
#include <bispectra/potentials.hpp>
#include <bispectra/reference.hpp>

#include <catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>

using namespace bispectra;
using Catch::Matchers::WithinAbs;

namespace {

Eigen::MatrixXd dense_dirac(const DiracOperator<double>& d) {
    const auto n = static_cast<Eigen::Index>(d.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) m(r, c) = d.entry(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    return m;
}

PotentialSamples<double> zero_potential(const RadialGrid<double>& g) {
    return sample_function<double>([](double) { return 0.0; }, g);
}

double schrodinger_ground(std::size_t n) {
    const RadialGrid<double> g(100.0, n);
    const auto op = assemble_schrodinger(g, sample_on_grid(PotentialSpec<double>::coulomb(), g), 0);
    return tridiag_smallest<double>(op, 1, 1e-14).eigenvalues[0];
}

// Second n = 2 state of the kappa = 1 channel (the upper pair member), as E~.
double dirac_second_level(std::size_t n) {
    const RadialGrid<double> g(100.0, n);
    const auto d = assemble_dirac(g, sample_on_grid(PotentialSpec<double>::coulomb(), g), 1);
    const auto r = shift_invert_bound_states<double>(d, 3, 1e-10);
    return tilde_from_edge_offset(r.edge_offsets[2]);
}

}  // namespace

TEST_CASE("free Schrodinger stencil", "[operators]") {
    const RadialGrid<double> g(3.0, 3);
    const auto op = assemble_schrodinger(g, zero_potential(g), 0);
    CHECK(std::vector<double>(op.diagonal().begin(), op.diagonal().end()) == std::vector<double>{2, 2, 2});
    CHECK(std::vector<double>(op.off_diagonal().begin(), op.off_diagonal().end()) == std::vector<double>{-1, -1});
    CHECK_THROWS_AS(assemble_schrodinger(g, zero_potential(g), -1), domain_error);
}

TEST_CASE("Schrodinger operator rejects samples from another grid", "[operators]") {
    const RadialGrid<double> a(3.0, 3), b(4.0, 3);
    CHECK_THROWS(assemble_schrodinger(a, zero_potential(b), 0));
    CHECK_THROWS(assemble_dirac(a, zero_potential(b), 1));
}

TEST_CASE("Schrodinger Coulomb levels on the default grid", "[operators]") {
    const RadialGrid<double> g(100.0, 20000);
    const auto v = sample_on_grid(PotentialSpec<double>::coulomb(), g);
    CHECK_THAT(tridiag_smallest<double>(assemble_schrodinger(g, v, 0), 1, 1e-13).eigenvalues[0], WithinAbs(-1.0, 1e-5));
    CHECK_THAT(tridiag_smallest<double>(assemble_schrodinger(g, v, 1), 1, 1e-13).eigenvalues[0], WithinAbs(-0.25, 1e-5));
}

TEST_CASE("free Schrodinger operator is positive and applies its own entries", "[operators][property]") {
    const RadialGrid<double> g(5.0, 60);
    const auto op = assemble_schrodinger(g, zero_potential(g), 0);
    CHECK(sturm_count<double>(op.diagonal(), op.off_diagonal(), 0.0) == 0);

    const auto n = static_cast<Eigen::Index>(op.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        t(i, i) = op.diagonal()[static_cast<std::size_t>(i)];
        if (i + 1 < n) t(i, i + 1) = t(i + 1, i) = op.off_diagonal()[static_cast<std::size_t>(i)];
    }
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(n, -1.0, 2.0), y(n);
    op.apply(std::span<const double>(x.data(), x.size()), std::span<double>(y.data(), y.size()));
    CHECK((y - t * x).norm() <= 1e-12 * (t * x).norm());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    CHECK(es.eigenvalues().minCoeff() > 0);
}

TEST_CASE("assembly is deterministic", "[operators][property]") {
    const RadialGrid<double> g(10.0, 500);
    const auto v = sample_on_grid(PotentialSpec<double>::test_particle(0.2), g);
    const auto a = assemble_schrodinger(g, v, 2), b = assemble_schrodinger(g, v, 2);
    CHECK(std::equal(a.diagonal().begin(), a.diagonal().end(), b.diagonal().begin()));
    CHECK(std::equal(a.off_diagonal().begin(), a.off_diagonal().end(), b.off_diagonal().begin()));
}

TEST_CASE("Dirac matrix is exactly symmetric with bandwidth 3", "[operators][property]") {
    const RadialGrid<double> g(4.0, 40);
    const auto d = assemble_dirac(g, sample_on_grid(PotentialSpec<double>::coulomb(), g), 2);
    const auto m = dense_dirac(d);
    CHECK((m - m.transpose()).cwiseAbs().maxCoeff() == 0.0);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            if (std::abs(r - c) > 3) CHECK(m(r, c) == 0.0);

    // The stencil as documented: u-slot alpha V + 1/alpha, v-slot alpha V - 1/alpha, kappa/rho
    // between u_j and v_j, -+1/(2h) to the neighbouring point.
    const double h = g.delta_rho(), a = alpha<double>();
    CHECK_THAT(m(0, 0), WithinAbs(a * coulomb(h) + 1 / a, 1e-12));
    CHECK_THAT(m(1, 1), WithinAbs(a * coulomb(h) - 1 / a, 1e-12));
    CHECK(m(0, 1) == 2 / h);
    CHECK(m(0, 3) == -1 / (2 * h));
    CHECK(m(1, 2) == 1 / (2 * h));
    CHECK(m(0, 2) == 0.0);

    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(m.rows(), 0.5, -3.0), y(m.rows());
    d.apply(std::span<const double>(x.data(), x.size()), std::span<double>(y.data(), y.size()));
    CHECK((y - m * x).norm() <= 1e-13 * (m * x).norm());
    CHECK_THROWS_AS(assemble_dirac(g, sample_on_grid(PotentialSpec<double>::coulomb(), g), 0), domain_error);
}

TEST_CASE("free Dirac operator has no eigenvalues inside the mass gap", "[operators]") {
    const RadialGrid<double> g(20.0, 200);
    const auto d = assemble_dirac(g, zero_potential(g), 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_dirac(d));
    CHECK(es.eigenvalues().cwiseAbs().minCoeff() >= (1 / alpha<double>()) * (1 - 1e-12));
    // The same from inertia: nothing between -1/alpha and +1/alpha.
    const double shrink = 1e-9 / alpha<double>();
    CHECK(d.factor(1 / alpha<double>() - shrink).negative_pivots() == d.factor(-1 / alpha<double>() + shrink).negative_pivots());
}

TEST_CASE("Dirac difference stencil has a chirally symmetric spectrum", "[operators][property]") {
    const RadialGrid<double> g(3.0, 30);
    const DiracOperator<double> d(g, std::vector<double>(30, 0.0), 0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_dirac(d));
    const auto& ev = es.eigenvalues();
    const auto n = ev.size();
    for (Eigen::Index i = 0; i < n; ++i) CHECK_THAT(ev(i), WithinAbs(-ev(n - 1 - i), 1e-9));
}

TEST_CASE("banded factorizations solve and count inertia", "[operators][property]") {
    const RadialGrid<double> g(4.0, 40);
    const auto d = assemble_dirac(g, sample_on_grid(PotentialSpec<double>::test_particle(0.3), g), 1);
    const auto m = dense_dirac(d);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    for (double shift : {-140.0, 0.0, 136.5, 137.0, 150.0}) {
        const auto f = d.factor(shift);
        const auto below = (es.eigenvalues().array() < shift).count();
        CHECK(static_cast<Eigen::Index>(f.negative_pivots()) == below);
        Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(m.rows(), 1.0, 2.0), x(m.rows());
        f.solve(std::span<const double>(b.data(), b.size()), std::span<double>(x.data(), x.size()));
        const Eigen::MatrixXd shifted = m - shift * Eigen::MatrixXd::Identity(m.rows(), m.cols());
        CHECK((shifted * x - b).norm() <= 1e-9 * b.norm());
    }

    const auto s = assemble_schrodinger(g, sample_on_grid(PotentialSpec<double>::coulomb(), g), 0);
    const auto f = s.factor(-0.3);
    CHECK(f.negative_pivots() == sturm_count<double>(s.diagonal(), s.off_diagonal(), -0.3));
}

TEST_CASE("Coulomb ground state converges at second order in the step", "[operators][property]") {
    // Schrodinger: error against -1 for N = 5000, 10000, 20000 at rho_inf = 100.
    const double e1 = std::abs(schrodinger_ground(5000) + 1);
    const double e2 = std::abs(schrodinger_ground(10000) + 1);
    const double e3 = std::abs(schrodinger_ground(20000) + 1);
    const double p1 = std::log2(e1 / e2), p2 = std::log2(e2 / e3);
    INFO("orders " << p1 << ", " << p2);
    CHECK(std::abs(p1 - 2.0) <= 0.2);
    CHECK(std::abs(p2 - 2.0) <= 0.2);
}

TEST_CASE("Dirac Coulomb n = 2 level converges at second order in the step", "[operators][property]") {
    // The ground state is exact to rounding at every N, so the order is read off n = 2.
    const double exact = dirac_coulomb_exact(2, 1);
    const double e1 = std::abs(dirac_second_level(5000) - exact);
    const double e2 = std::abs(dirac_second_level(10000) - exact);
    const double e3 = std::abs(dirac_second_level(20000) - exact);
    const double p1 = std::log2(e1 / e2), p2 = std::log2(e2 / e3);
    INFO("orders " << p1 << ", " << p2);
    CHECK(std::abs(p1 - 2.0) <= 0.2);
    CHECK(std::abs(p2 - 2.0) <= 0.2);

    const RadialGrid<double> g(100.0, 5000);
    const auto d = assemble_dirac(g, sample_on_grid(PotentialSpec<double>::coulomb(), g), 1);
    CHECK_THAT(tilde_from_edge_offset(shift_invert_bound_states<double>(d, 1, 1e-10).edge_offsets[0]), WithinAbs(dirac_coulomb_exact(1, 1), 1e-11));
}
