#include "phasered/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "phasered/errors.hpp"

namespace phasered {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension (Hairer, Norsett & Wanner).
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

double error_norm(std::span<const double> err, std::span<const double> x, std::span<const double> y,
                  const IntegratorOptions& o) {
    double s = 0.0;
    for (std::size_t i = 0; i < err.size(); ++i) {
        const double sc = o.atol + o.rtol * std::max(std::abs(x[i]), std::abs(y[i]));
        const double r = err[i] / sc;
        s += r * r;
    }
    return std::sqrt(s / static_cast<double>(err.size()));
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

} // namespace

void DenseStep::eval(double t, std::span<double> out) const {
    const std::size_t n = out.size();
    const double h = t1 - t0;
    const double th = h == 0.0 ? 0.0 : (t - t0) / h;
    const double th1 = 1.0 - th;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = r_[i] + th * (r_[n + i] + th1 * (r_[2 * n + i] + th * (r_[3 * n + i] + th1 * r_[4 * n + i])));
    }
}

std::vector<double> Dopri5::integrate(const OdeRhs& f, std::span<const double> x0, double t0, double t1,
                                      const StepObserver& observer) {
    if (!(opts_.rtol > 0.0) || !(opts_.atol > 0.0)) throw ConfigError("integrator tolerances must be positive");
    stats_ = {};
    const std::size_t n = x0.size();
    std::vector<double> x(x0.begin(), x0.end());
    if (t1 == t0 || n == 0) return x;
    const double dir = t1 > t0 ? 1.0 : -1.0;
    const double span = std::abs(t1 - t0);

    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), y(n), err(n);
    auto call = [&](double t, std::span<const double> s, std::span<double> d) {
        f(t, s, d);
        ++stats_.rhs_evals;
    };
    call(t0, x, k1);

    double h = opts_.initial_step;
    if (h <= 0.0) {
        // Hairer's starting-step heuristic.
        double dx = 0.0, df = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sc = opts_.atol + opts_.rtol * std::abs(x[i]);
            dx += (x[i] / sc) * (x[i] / sc);
            df += (k1[i] / sc) * (k1[i] / sc);
        }
        dx = std::sqrt(dx / n);
        df = std::sqrt(df / n);
        h = (dx < 1e-5 || df < 1e-5) ? 1e-6 : 0.01 * dx / df;
        h = std::min(h, span);
    }
    if (opts_.max_step > 0.0) h = std::min(h, opts_.max_step);

    DenseStep dense;
    dense.r_.resize(5 * n);
    double t = t0;
    bool last_rejected = false;

    while (dir * (t1 - t) > 0.0) {
        if (stats_.accepted + stats_.rejected >= opts_.max_steps) {
            throw NumericalError("integrator step budget exhausted at t = " + std::to_string(t));
        }
        const double min_step = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
        if (h < min_step) throw StiffnessError("step size underflow at t = " + std::to_string(t));
        bool final_step = false;
        if (h >= std::abs(t1 - t)) {
            h = std::abs(t1 - t);
            final_step = true;
        }
        const double hs = dir * h;

        bool stage_ok = true;
        try {
            for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + hs * a21 * k1[i];
            call(t + c2 * hs, tmp, k2);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + hs * (a31 * k1[i] + a32 * k2[i]);
            call(t + c3 * hs, tmp, k3);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
            call(t + c4 * hs, tmp, k4);
            for (std::size_t i = 0; i < n; ++i)
                tmp[i] = x[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
            call(t + c5 * hs, tmp, k5);
            for (std::size_t i = 0; i < n; ++i)
                tmp[i] = x[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
            call(t + hs, tmp, k6);
            for (std::size_t i = 0; i < n; ++i)
                y[i] = x[i] + hs * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
            call(t + hs, y, k7);
            stage_ok = all_finite(y) && all_finite(k7);
        } catch (const DomainError&) {
            // A trial stage left the domain of the vector field; retry with a smaller step.
            stage_ok = false;
        }

        double en = std::numeric_limits<double>::infinity();
        if (stage_ok) {
            for (std::size_t i = 0; i < n; ++i) {
                err[i] = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            }
            en = error_norm(err, x, y, opts_);
        }

        if (en <= 1.0) {
            if (observer) {
                for (std::size_t i = 0; i < n; ++i) {
                    const double ydiff = y[i] - x[i];
                    const double bspl = hs * k1[i] - ydiff;
                    dense.r_[i] = x[i];
                    dense.r_[n + i] = ydiff;
                    dense.r_[2 * n + i] = bspl;
                    dense.r_[3 * n + i] = ydiff - hs * k7[i] - bspl;
                    dense.r_[4 * n + i] =
                        hs * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
                }
                dense.t0 = t;
                dense.t1 = final_step ? t1 : t + hs;
                observer(dense);
            }
            t = final_step ? t1 : t + hs;
            x.swap(y);
            k1.swap(k7);
            ++stats_.accepted;
            double fac = en == 0.0 ? 5.0 : 0.9 * std::pow(en, -0.2);
            fac = std::clamp(fac, 0.2, 5.0);
            if (last_rejected) fac = std::min(fac, 1.0);
            h *= fac;
            if (opts_.max_step > 0.0) h = std::min(h, opts_.max_step);
            last_rejected = false;
        } else {
            ++stats_.rejected;
            const double fac = std::isfinite(en) ? std::clamp(0.9 * std::pow(en, -0.2), 0.1, 0.9) : 0.25;
            h *= fac;
            last_rejected = true;
        }
    }
    if (!all_finite(x)) throw NumericalError("integration produced a non-finite state");
    return x;
}

OdeRhs autonomous(const VectorField& field) {
    return [&field](double, std::span<const double> x, std::span<double> dx) { field.rhs(x, dx); };
}

std::vector<double> flow(const VectorField& field, std::span<const double> x0, double t,
                         const IntegratorOptions& opts) {
    Dopri5 solver(opts);
    return solver.integrate(autonomous(field), x0, 0.0, t);
}

std::vector<std::vector<double>> sample(const VectorField& field, std::span<const double> x0,
                                        std::span<const double> times, const IntegratorOptions& opts) {
    std::vector<std::vector<double>> out;
    if (times.empty()) return out;
    if (!std::is_sorted(times.begin(), times.end()) || times.front() < 0.0) {
        throw ConfigError("sample times must be non-negative and non-decreasing");
    }
    std::size_t next = 0;
    while (next < times.size() && times[next] == 0.0) {
        out.emplace_back(x0.begin(), x0.end());
        ++next;
    }
    if (next == times.size()) return out;
    Dopri5 solver(opts);
    std::vector<double> buf(x0.size());
    const auto last = solver.integrate(autonomous(field), x0, 0.0, times.back(), [&](const DenseStep& s) {
        while (next < times.size() && times[next] <= s.t1) {
            s.eval(times[next], buf);
            out.push_back(buf);
            ++next;
        }
    });
    while (next < times.size()) {
        out.push_back(last);
        ++next;
    }
    return out;
}

VariationalResult flow_with_variations(const VectorField& field, std::span<const double> x0, double T,
                                       const IntegratorOptions& opts) {
    const std::size_t n = field.dim();
    if (x0.size() != n) throw std::invalid_argument("state dimension mismatch");
    std::vector<double> z(n + n * n, 0.0);
    std::copy(x0.begin(), x0.end(), z.begin());
    for (std::size_t i = 0; i < n; ++i) z[n + i * n + i] = 1.0;  // column-major identity

    const OdeRhs f = [&field, n](double, std::span<const double> s, std::span<double> ds) {
        field.rhs(s.first(n), ds.first(n));
        const Eigen::MatrixXd J = field.jacobian(s.first(n));
        const auto nn = static_cast<Eigen::Index>(n);
        Eigen::Map<const Eigen::MatrixXd> P(s.data() + n, nn, nn);
        Eigen::Map<Eigen::MatrixXd> dP(ds.data() + n, nn, nn);
        dP.noalias() = J * P;
    };
    Dopri5 solver(opts);
    const auto zT = solver.integrate(f, z, 0.0, T);
    VariationalResult r;
    r.x.assign(zT.begin(), zT.begin() + static_cast<std::ptrdiff_t>(n));
    const auto nn = static_cast<Eigen::Index>(n);
    r.phi = Eigen::Map<const Eigen::MatrixXd>(zT.data() + n, nn, nn);
    return r;
}

} // namespace phasered
