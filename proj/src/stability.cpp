#include "phasered/stability.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "phasered/errors.hpp"

namespace phasered {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double x) { return x - kTwoPi * std::round(x / kTwoPi); }

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

} // namespace

double closure_error(const VectorField& field, std::span<const double> x, std::span<const double> y) {
    double e = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = y[i] - x[i];
        e = std::max(e, std::abs(i >= field.phase_begin() ? wrap_angle(d) : d));
    }
    return e;
}

MonodromyResult analyze_monodromy(const Eigen::MatrixXd& phi, std::span<const double> flow_direction, double T) {
    const auto n = phi.rows();
    if (phi.cols() != n || static_cast<Eigen::Index>(flow_direction.size()) != n) {
        throw std::invalid_argument("monodromy matrix and flow direction disagree in size");
    }
    Eigen::VectorXcd f(n);
    for (Eigen::Index i = 0; i < n; ++i) f(i) = flow_direction[static_cast<std::size_t>(i)];
    if (f.norm() == 0.0) throw NumericalError("flow direction vanishes; not a periodic orbit");

    Eigen::EigenSolver<Eigen::MatrixXd> es(phi, true);
    if (es.info() != Eigen::Success) throw NumericalError("eigenvalue iteration did not converge");

    MonodromyResult r;
    r.matrix = phi;
    r.period = T;
    double best = -1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        r.multipliers.push_back(es.eigenvalues()(i));
        const Eigen::VectorXcd v = es.eigenvectors().col(i);
        const double align = std::abs(v.dot(f)) / (v.norm() * f.norm());
        if (align > best) {
            best = align;
            r.trivial_index = static_cast<std::size_t>(i);
        }
    }
    double crit = -1.0;
    for (std::size_t i = 0; i < r.multipliers.size(); ++i) {
        r.exponents.push_back(std::log(r.multipliers[i]) / T);
        if (i == r.trivial_index) continue;
        if (std::abs(r.multipliers[i]) > crit) {
            crit = std::abs(r.multipliers[i]);
            r.critical = r.multipliers[i];
        }
    }
    return r;
}

MonodromyResult monodromy(const VectorField& field, const PeriodicOrbit& orbit, const IntegratorOptions& opts,
                          double closure_tol) {
    if (!(orbit.period > 0.0)) throw std::invalid_argument("orbit period must be positive");
    const auto var = flow_with_variations(field, orbit.x0, orbit.period, opts);
    const double closure = closure_error(field, orbit.x0, var.x);
    if (closure > closure_tol) {
        throw OrbitNotClosedError("orbit does not close: error " + std::to_string(closure));
    }
    std::vector<double> f(field.dim());
    field.rhs(orbit.x0, f);
    auto r = analyze_monodromy(var.phi, f, orbit.period);
    r.closure = closure;
    return r;
}

double prmm_sync_closed(ReductionOrder order, const Params& p, const ShapeFn& g) {
    order.validate();
    const double K = p.K, a = p.alpha, w = p.omega, m = p.m;
    const double s2 = std::sin(a) * std::sin(a);
    if (order.a == 1 && (order.b == 0 || order.delta_exact())) {
        return std::exp(-kTwoPi * K * std::cos(a) / w);
    }
    if (order.a == 2 && (order.b == 0 || order.b == 1)) {
        return std::exp(-kTwoPi * K / (m * w) * (m * std::cos(a) - K * s2));
    }
    if (order.a == 2 && order.b == 2) {
        if (p.delta != 0.0 && !(g == ShapeFn::sine())) {
            throw ConfigError("closed-form (2,2) sync multiplier is only available for g = sin(phi)");
        }
        const double d2 = p.delta * p.delta;
        const double inner = m * m * m * std::cos(a) + m * w * w * std::cos(a) - K * m * m * s2 -
                             2.0 * K * m * m * d2 * s2 - K * w * w * s2;
        return std::exp(-kTwoPi * K / (m * w * (m * m + w * w)) * inner);
    }
    throw ConfigError("no closed-form sync multiplier for reduction " + order.label());
}

std::vector<Complex> full_sync_spectrum_delta0(const Params& p, std::size_t n) {
    if (p.delta != 0.0) throw DomainError("closed-form full spectrum requires delta = 0; use monodromy");
    if (n == 0) throw std::invalid_argument("network must be non-empty");
    const double K = p.K, a = p.alpha, m = p.m;
    const Complex root = std::sqrt(Complex(m * m - 4.0 * K * K * std::sin(a) * std::sin(a), 0.0));
    const Complex base(m - 2.0 * K * std::cos(a), 0.0);
    std::vector<Complex> q;
    q.push_back(0.0);
    for (std::size_t i = 1; i < n; ++i) q.push_back(0.5 * (base + root));
    q.push_back(m);
    for (std::size_t i = 1; i < n; ++i) q.push_back(0.5 * (base - root));
    return q;
}

PeriodicOrbit sync_orbit(const VectorField& field, double omega) {
    if (!(omega > 0.0)) throw ConfigError("omega must be positive");
    PeriodicOrbit o;
    o.x0.assign(field.dim(), 0.0);
    for (std::size_t i = 0; i < field.phase_begin(); ++i) o.x0[i] = 1.0;
    o.period = kTwoPi / omega;
    o.kind = OrbitKind::Sync;
    return o;
}

double splay_amplitude(const Params& p) {
    const double disc = 1.0 + 4.0 * p.K * std::cos(p.alpha) / p.m;
    if (disc < 0.0) throw DomainError("splay state has no real amplitude for these parameters");
    return 0.5 * (1.0 + std::sqrt(disc));
}

double splay_frequency(const Params& p) {
    const double w = p.omega - p.K * std::sin(p.alpha);
    if (w == 0.0) throw DomainError("splay frequency omega - K sin(alpha) vanishes; period undefined");
    return w;
}

PeriodicOrbit splay_orbit_delta0(const Params& p, std::size_t n, bool full_state) {
    if (n == 0) throw std::invalid_argument("network must be non-empty");
    const double w = splay_frequency(p);
    if (w < 0.0) throw DomainError("splay orbit runs backwards (omega - K sin(alpha) < 0)");
    PeriodicOrbit o;
    if (full_state) o.x0.assign(n, splay_amplitude(p));
    for (std::size_t k = 0; k < n; ++k) o.x0.push_back(kTwoPi * static_cast<double>(k) / static_cast<double>(n));
    o.period = kTwoPi / w;
    o.kind = OrbitKind::Splay;
    return o;
}

std::array<Complex, 2> splay_eigs_reduced(ReductionOrder order, const Params& p) {
    const Complex ep = std::polar(1.0, p.alpha), em = std::polar(1.0, -p.alpha);
    if (order == ReductionOrder{1, 0}) return {0.5 * p.K * ep, 0.5 * p.K * em};
    if (order == ReductionOrder{2, 0}) {
        return {0.5 * p.K * ep * (1.0 - p.K * ep / (2.0 * p.m)), 0.5 * p.K * em * (1.0 - p.K * em / (2.0 * p.m))};
    }
    throw ConfigError("closed-form splay eigenvalues exist for (1,0) and (2,0) only");
}

PeriodicOrbit continue_orbit(const VectorField& field, const PeriodicOrbit& guess, const ShootingOptions& opts) {
    const std::size_t n = field.dim();
    const std::size_t s = field.phase_begin();  // section coordinate
    if (guess.x0.size() != n) throw std::invalid_argument("orbit guess has wrong dimension");
    if (s >= n) throw std::invalid_argument("vector field has no phase coordinate");
    if (!(guess.period > 0.0)) throw std::invalid_argument("orbit guess needs a positive period");

    std::vector<double> x = guess.x0;
    double T = guess.period;
    std::vector<double> f(n);

    // Residual x(T) - x - 2 pi w; the section phase must make exactly one revolution.
    auto residual = [&](const std::vector<double>& x0, double t, Eigen::MatrixXd* phi_out,
                        std::vector<double>* xT_out) {
        std::vector<double> xT;
        if (phi_out) {
            auto var = flow_with_variations(field, x0, t, opts.integrator);
            *phi_out = std::move(var.phi);
            xT = std::move(var.x);
        } else {
            xT = flow(field, x0, t, opts.integrator);
        }
        std::vector<double> r(n);
        for (std::size_t i = 0; i < n; ++i) {
            double d = xT[i] - x0[i];
            if (i == s) {
                d -= kTwoPi;
            } else if (i > s) {
                d = wrap_angle(d);
            }
            r[i] = d;
        }
        if (xT_out) *xT_out = std::move(xT);
        return r;
    };

    Eigen::MatrixXd phi;
    std::vector<double> xT;
    auto r = residual(x, T, &phi, &xT);
    double rn = max_abs(r);
    int it = 0;
    while (rn >= opts.tol) {
        if (it >= opts.max_iterations) {
            throw ContinuationError("Newton-Poincare shooting did not converge (residual " + std::to_string(rn) + ")");
        }
        ++it;
        field.rhs(xT, f);
        if (!(f[s] > 0.0)) throw SectionError("trajectory does not cross the section transversally");

        const auto nn = static_cast<Eigen::Index>(n);
        Eigen::MatrixXd J(nn, nn);
        Eigen::Index col = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == s) continue;
            J.col(col) = phi.col(static_cast<Eigen::Index>(j));
            J(static_cast<Eigen::Index>(j), col) -= 1.0;
            ++col;
        }
        for (std::size_t i = 0; i < n; ++i) J(static_cast<Eigen::Index>(i), nn - 1) = f[i];
        Eigen::VectorXd rv = Eigen::Map<const Eigen::VectorXd>(r.data(), nn);
        const Eigen::VectorXd step = J.colPivHouseholderQr().solve(-rv);
        if (!step.allFinite()) throw ContinuationError("singular shooting Jacobian");

        double lambda = 1.0;
        bool accepted = false;
        for (int h = 0; h <= opts.max_halvings; ++h, lambda *= 0.5) {
            std::vector<double> xn = x;
            col = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == s) continue;
                xn[j] += lambda * step(col++);
            }
            const double Tn = T + lambda * step(nn - 1);
            if (!(Tn > 0.0)) continue;
            try {
                Eigen::MatrixXd phin;
                std::vector<double> xTn;
                auto rnew = residual(xn, Tn, &phin, &xTn);
                const double rnn = max_abs(rnew);
                if (rnn < rn || h == opts.max_halvings) {
                    x = std::move(xn);
                    T = Tn;
                    phi = std::move(phin);
                    xT = std::move(xTn);
                    r = std::move(rnew);
                    rn = rnn;
                    accepted = true;
                    break;
                }
            } catch (const NumericalError&) {
                // try a shorter step
            } catch (const DomainError&) {
            }
        }
        if (!accepted) throw ContinuationError("shooting step left the domain of the vector field");
    }

    PeriodicOrbit out;
    out.x0 = std::move(x);
    out.period = T;
    out.kind = guess.kind == OrbitKind::Sync ? OrbitKind::Sync : OrbitKind::Continued;
    out.residual = rn;
    out.iterations = it;
    return out;
}

std::vector<PeriodicOrbit> continue_along(const FieldFamily& family, const PeriodicOrbit& seed,
                                          std::span<const double> path, const ShootingOptions& opts) {
    std::vector<PeriodicOrbit> out;
    PeriodicOrbit current = seed;
    for (double value : path) {
        const auto field = family(value);
        try {
            current = continue_orbit(*field, current, opts);
        } catch (const NumericalError&) {
            break;
        } catch (const DomainError&) {
            break;
        }
        out.push_back(current);
    }
    return out;
}

OrderParams order_parameter(std::span<const double> phi) {
    OrderParams o;
    if (phi.empty()) return o;
    Complex z2{};
    for (double v : phi) {
        o.Z += std::polar(1.0, v);
        z2 += std::polar(1.0, 2.0 * v);
    }
    o.Z /= static_cast<double>(phi.size());
    z2 /= static_cast<double>(phi.size());
    o.R = std::abs(o.Z);
    o.Psi = std::arg(o.Z);
    o.Q = std::abs(z2);
    o.Theta = std::arg(z2);
    return o;
}

double appendix_sync_floquet_correction(int n, HarmonicKind kind, const Params& p, double gamma) {
    if (n <= 0) throw std::invalid_argument("harmonic index must be >= 1");
    const double nw = n * p.omega;
    const double sa = std::sin(p.alpha);
    const double pre = 2.0 * p.K * p.K * p.delta * sa * sa / (p.m * p.m + nw * nw);
    const double c = std::cos(n * gamma), s = std::sin(n * gamma);
    return kind == HarmonicKind::Sin ? pre * (nw * c + p.m * s) : pre * (p.m * c - nw * s);
}

std::vector<UnitCrossing> find_unit_crossings(std::span<const double> K, std::span<const Complex> critical,
                                              double mask) {
    if (K.size() != critical.size()) throw std::invalid_argument("grid and multiplier lists differ in length");
    std::vector<UnitCrossing> out;
    std::ptrdiff_t prev = -1;
    for (std::size_t i = 0; i < K.size(); ++i) {
        if (std::abs(K[i]) < mask || !std::isfinite(critical[i].real()) || !std::isfinite(critical[i].imag())) {
            prev = -1;
            continue;
        }
        if (prev >= 0) {
            const auto j = static_cast<std::size_t>(prev);
            const double a = std::abs(critical[j]) - 1.0;
            const double b = std::abs(critical[i]) - 1.0;
            if ((a < 0.0) != (b < 0.0)) {
                const bool pair = std::abs(critical[j].imag()) > 1e-12 && std::abs(critical[i].imag()) > 1e-12;
                out.push_back({K[j], K[i], pair});
            }
        }
        prev = static_cast<std::ptrdiff_t>(i);
    }
    return out;
}

} // namespace phasered
