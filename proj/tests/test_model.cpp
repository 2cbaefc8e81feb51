#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "phasered/errors.hpp"
#include "phasered/model.hpp"
#include "phasered/stability.hpp"
#include "support.hpp"

using namespace phasered;
using testing::random_phases;
using testing::uniform;

namespace {

Params ref_params(double K, double delta) {
    Params p;
    p.omega = 1.0;
    p.m = -1.0;
    p.alpha = testing::kRefAlpha;
    p.K = K;
    p.delta = delta;
    return p;
}

FullState random_state(std::mt19937_64& rng, std::size_t n) {
    FullState s;
    for (std::size_t k = 0; k < n; ++k) s.R.push_back(uniform(rng, 0.6, 1.5));
    s.phi = random_phases(rng, n);
    return s;
}

Eigen::MatrixXd fd_jacobian(const FullState& s, const Model& model) {
    const auto x = s.flat();
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd J(n, n);
    const double h = 1e-6;
    std::vector<double> xp, xm, fp(x.size()), fm(x.size());
    for (Eigen::Index j = 0; j < n; ++j) {
        xp = x;
        xm = x;
        xp[static_cast<std::size_t>(j)] += h;
        xm[static_cast<std::size_t>(j)] -= h;
        full_rhs(xp, fp, model);
        full_rhs(xm, fm, model);
        for (Eigen::Index i = 0; i < n; ++i) J(i, j) = (fp[static_cast<std::size_t>(i)] - fm[static_cast<std::size_t>(i)]) / (2 * h);
    }
    return J;
}

} // namespace

TEST_CASE("parameter validation") {
    Params p;
    CHECK_NOTHROW(p.validate());
    p.m = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = Params{};
    p.omega = -1.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = Params{};
    p.delta = 1.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = Params{};
    p.K = std::nan("");
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = Params{};
    p.K = -0.3;  // negative coupling is admitted
    CHECK_NOTHROW(p.validate());
}

TEST_CASE("shape function derivatives agree with differencing") {
    CHECK_THROWS_AS(ShapeFn({{0, 1.0, 0.0}}), ConfigError);
    const ShapeFn g({{1, 0.3, -0.7}, {3, 0.2, 0.5}});
    const double h = 1e-5;
    for (double phi : {-2.0, 0.1, 1.7, 4.0}) {
        CHECK(g.derivative(phi) == doctest::Approx((g.value(phi + h) - g.value(phi - h)) / (2 * h)).epsilon(1e-8));
        CHECK(g.second_derivative(phi) ==
              doctest::Approx((g.derivative(phi + h) - g.derivative(phi - h)) / (2 * h)).epsilon(1e-7));
        const std::vector<double> phis{0.0, phi};
        CHECK(g.as_poly(2, 1).eval(phis) == doctest::Approx(g.value(phi)));
        CHECK(g.derivative_poly(2, 1).eval(phis) == doctest::Approx(g.derivative(phi)));
    }
    CHECK(g.scaled(2.0).value(0.4) == doctest::Approx(2.0 * g.value(0.4)));
}

TEST_CASE("network helpers") {
    const auto a = Network::all_to_all(4);
    CHECK(a.is_all_to_all());
    CHECK(a.is_symmetric());
    CHECK(a.degree(2) == 4.0);
    const auto s = testing::star_graph(4);
    CHECK(s.degree(0) == 3.0);
    CHECK(s.degree(1) == 1.0);
    CHECK_FALSE(s.is_all_to_all());
    CHECK_THROWS_AS(Network(Eigen::MatrixXd::Ones(2, 3)), ConfigError);
}

TEST_CASE("single oscillator") {
    Params p;
    p.omega = 1.3;
    const ShapeFn g = ShapeFn::sine();
    auto [dr, dphi] = single_rhs(1.0, 0.4, p, g);
    CHECK(dr == 0.0);
    CHECK(dphi == 1.3);

    p.m = -1.0;
    CHECK(single_rhs(2.0, 0.4, p, g).first == doctest::Approx(-4.0));

    // The deformed curve r = 1 + delta g(phi) is invariant.
    p.delta = 0.3;
    for (double phi : {0.0, 0.9, 2.5, 5.0}) {
        const double r = 1.0 + p.delta * g.value(phi);
        const auto [rdot, phidot] = single_rhs(r, phi, p, g);
        CHECK(std::abs(rdot - p.delta * g.derivative(phi) * phidot) < 1e-15);
    }

    p.delta = 0.9;
    CHECK_THROWS_AS(single_rhs(1.0, -1.0, p, ShapeFn::sine(1, 2.0)), DomainError);
}

TEST_CASE("transformed coordinates") {
    const ShapeFn g({{1, 0.2, 1.0}, {2, -0.3, 0.1}});
    CHECK(to_transformed(1.7, 0.3, 0.0, g) == 1.7);
    CHECK(to_transformed(1.0 + 0.2 * g.value(0.8), 0.8, 0.2, g) == doctest::Approx(1.0));
    std::mt19937_64 rng(3);
    for (int i = 0; i < 1000; ++i) {
        const double r = uniform(rng, 0.1, 3.0), phi = uniform(rng, 0.0, testing::kTwoPi),
                     delta = uniform(rng, -0.5, 0.5);
        REQUIRE(std::abs(from_transformed(to_transformed(r, phi, delta, g), phi, delta, g) - r) < 1e-14 * std::max(1.0, r));
    }
    CHECK_THROWS_AS(to_transformed(1.0, -1.5, 0.9, ShapeFn::sine(1, 2.0)), DomainError);
}

TEST_CASE("full system at special states") {
    const auto net = Network::all_to_all(3);
    const Model sync{ref_params(0.15, 0.2), ShapeFn::sine(), net};
    const auto v = full_rhs(FullState{{1, 1, 1}, {0.7, 0.7, 0.7}}, sync);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(std::abs(v.R[k]) < 1e-15);
        CHECK(v.phi[k] == doctest::Approx(1.0));
    }

    const Model uncoupled{ref_params(0.0, 0.2), ShapeFn::sine(), net};
    const auto w = full_rhs(FullState{{1, 1, 1}, {0.1, 2.0, 4.0}}, uncoupled);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(w.R[k] == 0.0);
        CHECK(w.phi[k] == 1.0);
    }

    const Params p = ref_params(0.1, 0.0);
    const Model splay{p, ShapeFn::sine(), net};
    const double Rs = splay_amplitude(p);
    const auto z = full_rhs(FullState{{Rs, Rs, Rs}, {0.0, testing::kTwoPi / 3, 2 * testing::kTwoPi / 3}}, splay);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(std::abs(z.R[k]) < 1e-12);
        CHECK(z.phi[k] == doctest::Approx(1.0 - 0.1 * std::sin(p.alpha)));
    }
}

TEST_CASE("Jacobian at the delta = 0 synchronized state has the block form") {
    const std::size_t n = 4;
    const Params p = ref_params(0.23, 0.0);
    const Model model{p, ShapeFn::sine(), Network::all_to_all(n)};
    const auto J = full_jacobian(FullState{std::vector<double>(n, 1.0), std::vector<double>(n, 1.1)}, model);
    const auto N = static_cast<Eigen::Index>(n);
    const Eigen::MatrixXd L = Eigen::MatrixXd::Ones(N, N) - n * Eigen::MatrixXd::Identity(N, N);
    const double c = p.K * std::cos(p.alpha) / n, s = p.K * std::sin(p.alpha) / n;
    Eigen::MatrixXd expected(2 * N, 2 * N);
    expected << p.m * Eigen::MatrixXd::Identity(N, N) + c * L, -s * L, s * L, c * L;
    CHECK((J - expected).cwiseAbs().maxCoeff() < 1e-14);

    const Model uncoupled{ref_params(0.0, 0.0), ShapeFn::sine(), Network::all_to_all(n)};
    const auto J0 = full_jacobian(FullState{std::vector<double>(n, 1.0), {0.1, 0.5, 2.0, 3.0}}, uncoupled);
    Eigen::MatrixXd diag = Eigen::MatrixXd::Zero(2 * N, 2 * N);
    diag.topLeftCorner(N, N) = -Eigen::MatrixXd::Identity(N, N);
    CHECK((J0 - diag).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("analytic Jacobian matches finite differences on random graphs") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 10; ++trial) {
        Params p = ref_params(uniform(rng, -0.4, 0.4), uniform(rng, -0.3, 0.3));
        p.alpha = uniform(rng, -3.0, 3.0);
        const ShapeFn g({{1, uniform(rng, -1, 1), uniform(rng, -1, 1)}, {2, uniform(rng, -0.5, 0.5), 0.3}});
        auto net = testing::random_digraph(rng, 4);
        const Model model{p, g, net};
        const auto s = random_state(rng, 4);
        const auto J = full_jacobian(s, model);
        const auto F = fd_jacobian(s, model);
        CHECK((J - F).cwiseAbs().maxCoeff() < 1e-6 * std::max(1.0, J.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("Cartesian dynamics agree with the transformed system under the chain rule") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 3;
        Params p = ref_params(uniform(rng, -0.5, 0.5), uniform(rng, -0.4, 0.4));
        p.alpha = uniform(rng, -3.0, 3.0);
        const ShapeFn g({{1, 0.3, 0.8}, {2, -0.2, 0.1}});
        const auto net = trial % 2 ? Network::all_to_all(n) : testing::random_digraph(rng, n);
        const Model model{p, g, net};
        const auto s = random_state(rng, n);
        const auto v = full_rhs(s, model);
        std::vector<std::complex<double>> A(n);
        for (std::size_t k = 0; k < n; ++k) A[k] = std::polar(from_transformed(s.R[k], s.phi[k], p.delta, g), s.phi[k]);
        const auto Adot = cartesian_rhs(A, model);
        for (std::size_t k = 0; k < n; ++k) {
            const double u = 1.0 + p.delta * g.value(s.phi[k]);
            const double r = s.R[k] * u;
            const double rdot = v.R[k] * u + s.R[k] * p.delta * g.derivative(s.phi[k]) * v.phi[k];
            const std::complex<double> expected = std::polar(1.0, s.phi[k]) * std::complex<double>(rdot, r * v.phi[k]);
            REQUIRE(std::abs(Adot[k] - expected) < 1e-10);
        }
    }
}

TEST_CASE("Cartesian special cases") {
    const std::size_t n = 3;
    const ShapeFn g = ShapeFn::sine();
    Params p = ref_params(0.0, 0.25);
    const Model uncoupled{p, g, Network::all_to_all(n)};
    std::vector<std::complex<double>> A;
    for (double phi : {0.3, 1.9, 4.4}) A.push_back(std::polar(1.0 + p.delta * g.value(phi), phi));
    const auto Ad = cartesian_rhs(A, uncoupled);
    for (std::size_t k = 0; k < n; ++k) {
        // Motion along the curve r(phi): radial velocity equals r'(phi) * phidot.
        const double phi = std::arg(A[k]);
        const std::complex<double> rot = Ad[k] * std::polar(1.0, -phi);
        const double phidot = rot.imag() / std::abs(A[k]);
        CHECK(std::abs(rot.real() - p.delta * g.derivative(phi) * phidot) < 1e-14);
    }

    p.K = 0.4;
    const Model coupled{p, g, Network::all_to_all(n)};
    const std::vector<std::complex<double>> same(n, std::polar(1.2, 0.7));
    const auto a = cartesian_rhs(same, coupled);
    const auto b = cartesian_rhs(same, Model{ref_params(0.0, 0.25), g, Network::all_to_all(n)});
    for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(a[k] - b[k]) < 1e-15);

    CHECK_THROWS_AS(cartesian_rhs(std::vector<std::complex<double>>(n, 0.0), coupled), DomainError);
}

TEST_CASE("circle equivariance holds only without deformation") {
    std::mt19937_64 rng(47);
    const std::size_t n = 4;
    const auto s = random_state(rng, n);
    FullState shifted = s;
    for (auto& v : shifted.phi) v += 0.77;

    const Model round{ref_params(0.2, 0.0), ShapeFn::sine(), Network::all_to_all(n)};
    const auto a = full_rhs(s, round), b = full_rhs(shifted, round);
    for (std::size_t k = 0; k < n; ++k) {
        CHECK(std::abs(a.R[k] - b.R[k]) < 1e-14);
        CHECK(std::abs(a.phi[k] - b.phi[k]) < 1e-14);
    }

    const Model deformed{ref_params(0.2, 0.2), ShapeFn::sine(), Network::all_to_all(n)};
    const auto c = full_rhs(s, deformed), d = full_rhs(shifted, deformed);
    double dev = 0.0;
    for (std::size_t k = 0; k < n; ++k) dev = std::max({dev, std::abs(c.R[k] - d.R[k]), std::abs(c.phi[k] - d.phi[k])});
    CHECK(dev > 1e-3);
}

TEST_CASE("relabeling oscillators commutes with the all-to-all dynamics") {
    std::mt19937_64 rng(53);
    const std::size_t n = 5;
    const Model model{ref_params(0.3, 0.15), ShapeFn({{1, 0.4, 0.6}}), Network::all_to_all(n)};
    const auto s = random_state(rng, n);
    const std::vector<std::size_t> perm{3, 0, 4, 1, 2};
    FullState t;
    for (std::size_t k = 0; k < n; ++k) {
        t.R.push_back(s.R[perm[k]]);
        t.phi.push_back(s.phi[perm[k]]);
    }
    const auto a = full_rhs(s, model), b = full_rhs(t, model);
    for (std::size_t k = 0; k < n; ++k) {
        CHECK(b.R[k] == doctest::Approx(a.R[perm[k]]).epsilon(1e-13));
        CHECK(b.phi[k] == doctest::Approx(a.phi[perm[k]]).epsilon(1e-13));
    }
}

TEST_CASE("unit-radius phase field is the phase part of the full field on R = 1") {
    std::mt19937_64 rng(59);
    const std::size_t n = 4;
    const Model model{ref_params(0.3, 0.25), ShapeFn({{1, 0.2, 1.0}, {2, 0.1, -0.2}}), testing::random_digraph(rng, n)};
    const auto phi = random_phases(rng, n);
    const auto v = full_rhs(FullState{std::vector<double>(n, 1.0), phi}, model);
    std::vector<double> w(n);
    unit_radius_phase_rhs(phi, w, model);
    for (std::size_t k = 0; k < n; ++k) CHECK(w[k] == doctest::Approx(v.phi[k]).epsilon(1e-14));

    const auto J = unit_radius_phase_jacobian(phi, model);
    const double h = 1e-6;
    for (std::size_t j = 0; j < n; ++j) {
        auto pp = phi, pm = phi;
        pp[j] += h;
        pm[j] -= h;
        std::vector<double> fp(n), fm(n);
        unit_radius_phase_rhs(pp, fp, model);
        unit_radius_phase_rhs(pm, fm, model);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(std::abs(J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - (fp[i] - fm[i]) / (2 * h)) < 1e-7);
        }
    }
}

TEST_CASE("the unit torus is invariant without coupling") {
    std::mt19937_64 rng(61);
    const Model model{ref_params(0.0, 0.3), ShapeFn::sine(), testing::random_digraph(rng, 5)};
    const auto v = full_rhs(FullState{std::vector<double>(5, 1.0), random_phases(rng, 5)}, model);
    for (double r : v.R) CHECK(r == 0.0);
}
