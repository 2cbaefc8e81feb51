#include <doctest.h>

#include <cmath>
#include <random>

#include "phasered/errors.hpp"
#include "phasered/model.hpp"
#include "phasered/reduction.hpp"
#include "support.hpp"

using namespace phasered;
using testing::random_phases;
using testing::uniform;

namespace {

Params make_params(double K, double delta, double alpha = testing::kRefAlpha, double m = -1.0, double omega = 1.0) {
    Params p;
    p.omega = omega;
    p.m = m;
    p.alpha = alpha;
    p.K = K;
    p.delta = delta;
    return p;
}

double entry(const Network& net, std::size_t k, std::size_t l) { return net(k, l); }

// s0(x) = cos(alpha) - cos(x + alpha)
double s0(double x, double alpha) { return std::cos(alpha) - std::cos(x + alpha); }

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

std::vector<double> reduced_rhs(const ReducedSystem& rs, const std::vector<double>& phi) {
    std::vector<double> out(phi.size());
    rs.rhs(phi, out);
    return out;
}

} // namespace

TEST_CASE("reduction order parsing and validation") {
    CHECK(ReductionOrder::parse("(2,2)") == ReductionOrder{2, 2});
    CHECK(ReductionOrder::parse("1, inf") == ReductionOrder{1, ReductionOrder::kExact});
    CHECK(ReductionOrder{1, ReductionOrder::kExact}.label() == "(1,inf)");
    CHECK(ReductionOrder{2, 0}.label() == "(2,0)");
    CHECK_THROWS_AS(ReductionOrder::parse("22"), ConfigError);
    CHECK_THROWS_AS(ReductionOrder::parse("(x,2)"), ConfigError);
    CHECK_THROWS_AS((ReductionOrder{3, 0}.validate()), ConfigError);
    CHECK_THROWS_AS((ReductionOrder{2, 3}.validate()), ConfigError);
    CHECK_THROWS_AS((ReductionOrder{2, ReductionOrder::kExact}.validate()), ConfigError);
    CHECK_NOTHROW((ReductionOrder{0, 2}.validate()));
}

TEST_CASE("first torus correction without deformation") {
    const std::size_t n = 4;
    std::mt19937_64 rng(71);
    const auto net = testing::random_digraph(rng, n);
    const Params p = make_params(0.1, 0.0, 0.9, -1.4, 1.3);
    const auto R10 = compute_R1(net, p, ShapeFn::sine(), 0);
    for (int s = 0; s < 50; ++s) {
        const auto phi = random_phases(rng, n);
        for (std::size_t k = 0; k < n; ++k) {
            double expected = 0.0;
            for (std::size_t l = 0; l < n; ++l) expected += entry(net, k, l) * s0(phi[l] - phi[k], p.alpha);
            expected /= n * p.m;
            REQUIRE(R10[k].eval(phi) == doctest::Approx(expected).epsilon(1e-13));
        }
    }
}

TEST_CASE("R(1,1) for a sine deformation at alpha = 0 factorizes") {
    const std::size_t n = 3;
    const Params p = make_params(0.1, 0.1, 0.0, -0.8, 1.2);
    const auto net = Network::all_to_all(n);
    const auto R11 = compute_R1(net, p, ShapeFn::sine(), 1);
    const double w = p.omega, m = p.m;
    const double pre = 1.0 / (2.0 * n * (m * m + w * w));
    std::mt19937_64 rng(73);
    for (int s = 0; s < 100; ++s) {
        const auto phi = random_phases(rng, n);
        for (std::size_t k = 0; k < n; ++k) {
            double expected = 0.0;
            for (std::size_t l = 0; l < n; ++l) {
                const double ck = std::cos(phi[k]), cl = std::cos(phi[l]);
                const double sk = std::sin(phi[k]), sl = std::sin(phi[l]);
                expected += -2.0 * (1.0 - std::cos(phi[k] - phi[l])) * (2 * w * ck - w * cl + 2 * m * sk - m * sl);
            }
            REQUIRE(std::abs(R11[k].eval(phi) - pre * expected) < 1e-13);
        }
    }
}

TEST_CASE("closed-form single-harmonic R(1,1) matches the general solver") {
    std::mt19937_64 rng(79);
    for (int h = 1; h <= 3; ++h) {
        for (auto kind : {HarmonicKind::Sin, HarmonicKind::Cos}) {
            const auto net = h == 2 ? testing::random_digraph(rng, 4) : Network::all_to_all(3);
            const Params p = make_params(0.1, 0.1, uniform(rng, -2.0, 2.0), -uniform(rng, 0.5, 2.0), uniform(rng, 0.5, 2.0));
            const ShapeFn g = kind == HarmonicKind::Sin ? ShapeFn::sine(h) : ShapeFn::cosine(h);
            const auto solved = compute_R1(net, p, g, 1);
            const auto closed = appendix_R11_harmonic(h, kind, net, p);
            for (std::size_t k = 0; k < net.size(); ++k) CHECK(solved[k].approx_equal(closed[k], 1e-14));
        }
    }
    CHECK_THROWS_AS(appendix_R11_harmonic(0, HarmonicKind::Sin, Network::all_to_all(3), make_params(0.1, 0.1)),
                    std::invalid_argument);
}

TEST_CASE("R(1,1) is linear in the deformation profile") {
    const auto net = testing::cycle_with_chord(5);
    const Params p = make_params(0.1, 0.1, 1.1);
    const auto a = compute_R1(net, p, ShapeFn::sine(2, 0.7), 1);
    const auto b = compute_R1(net, p, ShapeFn::cosine(1, -0.4), 1);
    const auto ab = compute_R1(net, p, ShapeFn({{1, -0.4, 0.0}, {2, 0.0, 0.7}}), 1);
    for (std::size_t k = 0; k < net.size(); ++k) CHECK(ab[k].approx_equal(a[k] + b[k], 1e-14));
}

TEST_CASE("R(1,2) scales quadratically with the deformation amplitude") {
    const auto net = testing::star_graph(4);
    const Params p = make_params(0.1, 0.1, 0.6);
    const ShapeFn g({{1, 0.3, 0.5}, {2, -0.2, 0.1}});
    const double gamma = 1.7;
    const auto base = compute_R1(net, p, g, 2);
    const auto scaled = compute_R1(net, p, g.scaled(gamma), 2);
    for (std::size_t k = 0; k < net.size(); ++k) CHECK(scaled[k].approx_equal(base[k] * (gamma * gamma), 1e-13));
}

TEST_CASE("torus terms solve their order-by-order equations") {
    std::mt19937_64 rng(83);
    const auto net = testing::random_digraph(rng, 3);
    const Params p = make_params(0.1, 0.1, 0.8, -1.3, 0.9);
    const ShapeFn g({{1, 0.4, 0.9}, {3, 0.0, -0.3}});
    std::vector<std::vector<TrigPoly>> lower;
    for (int j = 0; j <= 2; ++j) {
        const auto R = compute_R1(net, p, g, j);
        const auto src = r1_source(net, p, g, j, lower);
        for (std::size_t k = 0; k < net.size(); ++k) {
            const auto residual = R[k] * p.m + src[k] - R[k].directional_derivative() * p.omega;
            for (int s = 0; s < 200; ++s) REQUIRE(std::abs(residual.eval(random_phases(rng, 3))) < 1e-10);
        }
        lower.push_back(R);
    }
    CHECK_THROWS_AS(r1_source(net, p, g, 2, {}), std::invalid_argument);
}

TEST_CASE("torus expansion is invariant under the full flow to the expected order") {
    // Residual of R' = grad(radius) . phi' on the expanded torus; O(K^2) at delta = 0.
    const std::size_t n = 3;
    std::mt19937_64 rng(89);
    const auto net = Network::all_to_all(n);
    const ShapeFn g = ShapeFn::sine();
    auto residual = [&](double K, double delta, const std::vector<double>& phi) {
        const Params p = make_params(K, delta, 1.2);
        const Model model{p, g, net};
        const auto torus = compute_torus(net, p, g, 2);
        FullState s;
        s.phi = phi;
        for (std::size_t k = 0; k < n; ++k) s.R.push_back(torus.radius(k, phi, K, delta));
        const auto v = full_rhs(s, model);
        double worst = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            double along = 0.0;
            for (const auto& [key, polys] : torus.terms) {
                for (std::size_t j = 0; j < n; ++j) {
                    along += K * std::pow(delta, key.second) * polys[k].derivative(j).eval(phi) * v.phi[j];
                }
            }
            worst = std::max(worst, std::abs(v.R[k] - along));
        }
        return worst;
    };
    for (int s = 0; s < 5; ++s) {
        const auto phi = random_phases(rng, n);
        const double r1 = residual(2e-3, 0.0, phi), r2 = residual(1e-3, 0.0, phi);
        CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.05));
        // At small K the delta-truncation error dominates and shrinks like delta^3.
        const double d1 = residual(1e-6, 0.08, phi), d2 = residual(1e-6, 0.04, phi);
        CHECK(d1 / d2 == doctest::Approx(8.0).epsilon(0.15));
    }
}

TEST_CASE("radius gradient of the phase coupling") {
    std::mt19937_64 rng(97);
    const std::size_t n = 4;
    const auto net = testing::random_digraph(rng, n);
    const double K = 0.3;
    const Params p = make_params(K, 0.0, 0.7);
    const Model model{p, ShapeFn::sine(), net};
    const auto grad = compute_gradH(net, p, ShapeFn::sine(), 0);
    const double h = 1e-6;
    for (int s = 0; s < 10; ++s) {
        const auto phi = random_phases(rng, n);
        for (std::size_t l = 0; l < n; ++l) {
            FullState plus{std::vector<double>(n, 1.0), phi}, minus = plus;
            plus.R[l] += h;
            minus.R[l] -= h;
            const auto vp = full_rhs(plus, model), vm = full_rhs(minus, model);
            for (std::size_t k = 0; k < n; ++k) {
                const double fd = (vp.phi[k] - vm.phi[k]) / (2 * h * K);
                REQUIRE(grad[k][l].eval(phi) == doctest::Approx(fd).epsilon(1e-7));
            }
        }
    }
}

TEST_CASE("first-order terms reproduce the Kuramoto-Sakaguchi coupling") {
    std::mt19937_64 rng(101);
    const std::size_t n = 5;
    const auto net = testing::random_digraph(rng, n);
    const Params p = make_params(0.2, 0.0, 1.3);
    const auto P10 = compute_P(net, p, ShapeFn::sine(), 1, 0);
    for (int s = 0; s < 50; ++s) {
        const auto phi = random_phases(rng, n);
        for (std::size_t k = 0; k < n; ++k) {
            double expected = 0.0;
            for (std::size_t l = 0; l < n; ++l) {
                expected += entry(net, k, l) * (std::sin(phi[l] - phi[k] + p.alpha) - std::sin(p.alpha));
            }
            REQUIRE(P10[k].eval(phi) == doctest::Approx(expected / n).epsilon(1e-13));
        }
    }
}

TEST_CASE("second-order undeformed terms equal the explicit double sum") {
    std::mt19937_64 rng(103);
    const std::size_t n = 4;
    const auto net = testing::random_digraph(rng, n);
    const Params p = make_params(0.2, 0.0, 1.8, -0.7);
    const auto P20 = compute_P(net, p, ShapeFn::sine(), 2, 0);
    const double a = p.alpha, pre = 1.0 / (double(n * n) * p.m);
    for (int s = 0; s < 50; ++s) {
        const auto phi = random_phases(rng, n);
        for (std::size_t k = 0; k < n; ++k) {
            double expected = 0.0;
            for (std::size_t l = 0; l < n; ++l) {
                double inner_l = 0.0, inner_k = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    inner_l += entry(net, l, i) * s0(phi[i] - phi[l], a);
                    inner_k += entry(net, k, i) * s0(phi[i] - phi[k], a);
                }
                expected += entry(net, k, l) * std::sin(phi[l] - phi[k] + a) * (inner_l - inner_k);
            }
            REQUIRE(std::abs(P20[k].eval(phi) - pre * expected) < 1e-13);
        }
    }
}

TEST_CASE("(2,0) all-to-all reduction in mean-field form") {
    std::mt19937_64 rng(107);
    for (std::size_t n : {3u, 6u}) {
        const Params p = make_params(0.15, 0.0, 1.4, -0.9, 1.1);
        const auto rs = assemble(Network::all_to_all(n), p, ShapeFn::sine(), {2, 0});
        for (int s = 0; s < 100; ++s) {
            const auto phi = random_phases(rng, n);
            REQUIRE(max_abs_diff(reduced_rhs(rs, phi), meanfield_20_rhs(phi, p)) < 1e-13);
        }
    }
}

TEST_CASE("zeroth order in K is the free rotation") {
    std::mt19937_64 rng(109);
    const Params p = make_params(0.3, 0.2, 1.0, -1.0, 1.7);
    for (int b : {0, 1, 2}) {
        const auto rs = assemble(testing::random_digraph(rng, 4), p, ShapeFn::sine(), {0, b});
        for (double v : reduced_rhs(rs, random_phases(rng, 4))) CHECK(v == 1.7);
    }
}

TEST_CASE("delta-exact first order equals the full phase equation on the unit torus") {
    std::mt19937_64 rng(113);
    const std::size_t n = 4;
    const auto net = testing::random_digraph(rng, n);
    const Params p = make_params(0.25, 0.3, 1.7);
    const ShapeFn g({{1, 0.2, 0.8}, {2, 0.3, 0.0}});
    const auto rs = assemble(net, p, g, {1, ReductionOrder::kExact});
    const Model model{p, g, net};
    for (int s = 0; s < 50; ++s) {
        const auto phi = random_phases(rng, n);
        const auto v = full_rhs(FullState{std::vector<double>(n, 1.0), phi}, model);
        REQUIRE(max_abs_diff(reduced_rhs(rs, phi), v.phi) < 1e-14);
    }
}

TEST_CASE("truncated first order converges to the delta-exact one") {
    std::mt19937_64 rng(127);
    const std::size_t n = 3;
    const auto net = Network::all_to_all(n);
    const auto phi = random_phases(rng, n);
    auto err = [&](double delta) {
        const Params p = make_params(0.2, delta, 1.7);
        return max_abs_diff(reduced_rhs(assemble(net, p, ShapeFn::sine(), {1, 2}), phi),
                            reduced_rhs(assemble(net, p, ShapeFn::sine(), {1, ReductionOrder::kExact}), phi));
    };
    CHECK(err(0.04) / err(0.02) == doctest::Approx(8.0).epsilon(0.1));
}

TEST_CASE("rotating every phase commutes with the undeformed reduction only") {
    std::mt19937_64 rng(131);
    const std::size_t n = 4;
    const auto net = testing::random_digraph(rng, n);
    const auto phi = random_phases(rng, n);
    auto moved = phi;
    for (auto& v : moved) v += 1.1;

    const auto r20 = assemble(net, make_params(0.2, 0.0), ShapeFn::sine(), {2, 0});
    CHECK(max_abs_diff(reduced_rhs(r20, phi), reduced_rhs(r20, moved)) < 1e-13);

    const auto r21 = assemble(net, make_params(0.2, 0.2), ShapeFn::sine(), {2, 1});
    CHECK(max_abs_diff(reduced_rhs(r21, phi), reduced_rhs(r21, moved)) > 1e-4);
}

TEST_CASE("reduced Jacobian matches finite differences") {
    std::mt19937_64 rng(137);
    const std::size_t n = 4;
    for (auto order : {ReductionOrder{2, 2}, ReductionOrder{1, ReductionOrder::kExact}}) {
        const auto rs = assemble(testing::random_digraph(rng, n), make_params(0.2, 0.15, 1.2), ShapeFn::sine(), order);
        const auto phi = random_phases(rng, n);
        const auto J = rs.jacobian(phi);
        const double h = 1e-6;
        for (std::size_t j = 0; j < n; ++j) {
            auto pp = phi, pm = phi;
            pp[j] += h;
            pm[j] -= h;
            const auto fp = reduced_rhs(rs, pp), fm = reduced_rhs(rs, pm);
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(std::abs(J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - (fp[i] - fm[i]) / (2 * h)) < 1e-7);
            }
        }
    }
}

TEST_CASE("changing the coupling reuses the expansion") {
    const auto net = Network::all_to_all(3);
    const auto rs = assemble(net, make_params(0.1, 0.1), ShapeFn::sine(), {2, 2});
    const auto moved = rs.with_coupling(0.25, 0.05);
    const auto direct = assemble(net, make_params(0.25, 0.05), ShapeFn::sine(), {2, 2});
    const std::vector<double> phi{0.2, 1.9, 4.1};
    CHECK(max_abs_diff(reduced_rhs(moved, phi), reduced_rhs(direct, phi)) < 1e-15);
    CHECK(rs.to_json() == direct.to_json());
}

TEST_CASE("reduction errors") {
    const auto net = Network::all_to_all(3);
    Params p = make_params(0.1, 0.1);
    CHECK_THROWS_AS(compute_P(net, p, ShapeFn::sine(), 3, 0), std::invalid_argument);
    CHECK_THROWS_AS(compute_P(net, p, ShapeFn::sine(), 1, 3), std::invalid_argument);
    p.m = 0.0;
    CHECK_THROWS_AS(compute_R1(net, p, ShapeFn::sine(), 0), SingularOperatorError);
}

TEST_CASE("Stuart-Landau parameter mapping") {
    const auto p = LeonPazoParams{0.1, 1.0}.to_params(2.0);
    CHECK(p.K == doctest::Approx(0.1 * std::sqrt(2.0)));
    CHECK(p.alpha == doctest::Approx(testing::kPi / 4));
    CHECK(p.m == -2.0);
    CHECK(p.omega == 2.0);
    CHECK(LeonPazoParams{0.1, -3.0}.to_params(1.0).alpha == doctest::Approx(std::atan(-3.0)));
}
