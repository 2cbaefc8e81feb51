#include "phasered/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>

#include "phasered/errors.hpp"

namespace phasered {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kMaxDeltaStep = 0.02;

IntegratorOptions orbit_integrator(const ExperimentConfig& cfg) { return {cfg.tol, cfg.tol * 1e-2}; }

ShootingOptions shooting_options(const ExperimentConfig& cfg) {
    ShootingOptions o;
    o.integrator = {std::min(cfg.tol, 1e-11), std::min(cfg.tol, 1e-11) * 1e-2};
    return o;
}

Params with_point(Params p, double K, double delta) {
    p.K = K;
    p.delta = delta;
    return p;
}

double wrap_angle(double x) { return x - kTwoPi * std::round(x / kTwoPi); }

SweepRow failed_row(double delta, double K, const SystemSpec& spec, std::string reason) {
    return {delta, K, spec.label(), kNaN, {kNaN, kNaN}, false, std::move(reason)};
}

/// Reduced systems built once per sweep; grid points only rescale K and delta.
struct SystemBank {
    std::vector<SystemSpec> specs;
    std::vector<std::optional<ReducedSystem>> bases;

    SystemBank(const ExperimentConfig& cfg, std::vector<SystemSpec> s) : specs(std::move(s)) {
        for (const auto& spec : specs) {
            if (spec.full) {
                bases.emplace_back();
            } else {
                bases.emplace_back(assemble(cfg.network, cfg.params, cfg.g, spec.order));
            }
        }
    }

    std::unique_ptr<VectorField> field(const ExperimentConfig& cfg, std::size_t s, double K, double delta) const {
        if (specs[s].full) {
            return std::make_unique<FullSystem>(Model{with_point(cfg.params, K, delta), cfg.g, cfg.network});
        }
        return std::make_unique<ReducedSystem>(bases[s]->with_coupling(K, delta));
    }
};

bool has_closed_sync_form(const SystemSpec& spec, const ExperimentConfig& cfg, double delta) {
    if (spec.full) return false;
    const auto& o = spec.order;
    if (o.a == 1) return o.b == 0 || o.delta_exact();
    if (o.a == 2 && (o.b == 0 || o.b == 1)) return true;
    if (o.a == 2 && o.b == 2) return delta == 0.0 || cfg.g == ShapeFn::sine();
    return false;
}

SweepRow sync_point(const ExperimentConfig& cfg, const SystemBank& bank, std::size_t s, double K, double delta) {
    const SystemSpec& spec = bank.specs[s];
    SweepRow row{delta, K, spec.label(), kTwoPi / cfg.params.omega, {1.0, 0.0}, true, {}};
    try {
        if (has_closed_sync_form(spec, cfg, delta)) {
            row.prmm = prmm_sync_closed(spec.order, with_point(cfg.params, K, delta), cfg.g);
            return row;
        }
        const auto field = bank.field(cfg, s, K, delta);
        const auto orbit = sync_orbit(*field, cfg.params.omega);
        row.prmm = monodromy(*field, orbit, orbit_integrator(cfg)).critical;
        return row;
    } catch (const std::exception& e) {
        return failed_row(delta, K, spec, e.what());
    }
}

/// Splay-orbit rows of one (K, system) column, continued from delta = 0 outwards.
std::vector<SweepRow> splay_column(const ExperimentConfig& cfg, const SystemBank& bank, std::size_t s, double K,
                                   const std::vector<double>& deltas) {
    const SystemSpec& spec = bank.specs[s];
    std::vector<SweepRow> rows(deltas.size());
    PeriodicOrbit seed;
    try {
        seed = splay_orbit_delta0(with_point(cfg.params, K, 0.0), cfg.network.size(), spec.full);
    } catch (const std::exception& e) {
        for (std::size_t i = 0; i < deltas.size(); ++i) rows[i] = failed_row(deltas[i], K, spec, e.what());
        return rows;
    }
    const auto shoot = shooting_options(cfg);

    // Indices of non-negative deltas ascending, then negative ones descending.
    std::vector<std::size_t> up, down;
    for (std::size_t i = 0; i < deltas.size(); ++i) (deltas[i] >= 0.0 ? up : down).push_back(i);
    std::sort(up.begin(), up.end(), [&](auto a, auto b) { return deltas[a] < deltas[b]; });
    std::sort(down.begin(), down.end(), [&](auto a, auto b) { return deltas[a] > deltas[b]; });

    for (const auto* branch : {&up, &down}) {
        PeriodicOrbit current = seed;
        double at = 0.0;
        std::string failure;
        for (std::size_t idx : *branch) {
            const double target = deltas[idx];
            if (!failure.empty()) {
                rows[idx] = failed_row(target, K, spec, failure);
                continue;
            }
            try {
                const int substeps = std::max(1, static_cast<int>(std::ceil(std::abs(target - at) / kMaxDeltaStep - 1e-9)));
                const double from = at;
                std::unique_ptr<VectorField> field;
                for (int k = 1; k <= substeps; ++k) {
                    const double d = k == substeps ? target : from + (target - from) * k / substeps;
                    field = bank.field(cfg, s, K, d);
                    current = continue_orbit(*field, current, shoot);
                    at = d;
                }
                const auto M = monodromy(*field, current, shoot.integrator);
                rows[idx] = {target, K, spec.label(), current.period, M.critical, true, {}};
            } catch (const std::exception& e) {
                failure = std::string("continuation failed near delta = ") + format_double(at) + ": " + e.what();
                rows[idx] = failed_row(target, K, spec, failure);
            }
        }
    }
    return rows;
}

std::vector<SystemSpec> systems_or(const ExperimentConfig& cfg, std::vector<SystemSpec> fallback) {
    return cfg.systems.empty() ? fallback : cfg.systems;
}

void require_splay_size(const ExperimentConfig& cfg) {
    if (cfg.network.size() != 3) throw ConfigError("splay analysis is restricted to N = 3");
}

std::vector<SweepRow> sweep_sync_impl(const ExperimentConfig& cfg, bool parallel) {
    const SystemBank bank(cfg, systems_or(cfg, default_sync_systems()));
    const auto deltas = cfg.delta_grid.values();
    const auto Ks = cfg.K_grid.values();
    const std::size_t ns = bank.specs.size();
    const std::size_t total = deltas.size() * Ks.size() * ns;
    std::vector<SweepRow> rows(total);
    const auto point = [&](std::size_t idx) {
        const std::size_t s = idx % ns;
        const std::size_t ki = (idx / ns) % Ks.size();
        const std::size_t di = idx / (ns * Ks.size());
        rows[idx] = sync_point(cfg, bank, s, Ks[ki], deltas[di]);
    };
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (std::size_t idx = 0; idx < total; ++idx) point(idx);
    } else {
        for (std::size_t idx = 0; idx < total; ++idx) point(idx);
    }
    return rows;
}

std::vector<SweepRow> sweep_splay_impl(const ExperimentConfig& cfg, bool parallel) {
    require_splay_size(cfg);
    const SystemBank bank(cfg, systems_or(cfg, default_splay_systems()));
    const auto deltas = cfg.delta_grid.values();
    const auto Ks = cfg.K_grid.values();
    const std::size_t ns = bank.specs.size();
    const std::size_t columns = Ks.size() * ns;
    std::vector<std::vector<SweepRow>> cols(columns);
    const auto column = [&](std::size_t c) { cols[c] = splay_column(cfg, bank, c % ns, Ks[c / ns], deltas); };
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (std::size_t c = 0; c < columns; ++c) column(c);
    } else {
        for (std::size_t c = 0; c < columns; ++c) column(c);
    }
    std::vector<SweepRow> rows;
    rows.reserve(deltas.size() * columns);
    for (std::size_t di = 0; di < deltas.size(); ++di) {
        for (std::size_t c = 0; c < columns; ++c) rows.push_back(cols[c][di]);
    }
    return rows;
}

} // namespace

std::unique_ptr<VectorField> make_system(const ExperimentConfig& cfg, const SystemSpec& spec, double K, double delta) {
    const Params p = with_point(cfg.params, K, delta);
    if (spec.full) return std::make_unique<FullSystem>(Model{p, cfg.g, cfg.network});
    return std::make_unique<ReducedSystem>(assemble(cfg.network, p, cfg.g, spec.order));
}

HybridSecondOrder::HybridSecondOrder(const Network& net, const Params& p, const ShapeFn& g)
    : exact_(assemble(net, p, g, ReductionOrder{1, ReductionOrder::kExact})) {
    const std::size_t n = net.size();
    std::vector<TrigPoly> second(n, TrigPoly(n));
    for (int j = 0; j <= 2; ++j) {
        const auto P = compute_P(net, p, g, 2, j);
        const double w = p.K * p.K * std::pow(p.delta, j);
        for (std::size_t k = 0; k < n; ++k) second[k] += P[k] * w;
    }
    second_ = CompiledPhasePolys(second);
}

void HybridSecondOrder::rhs(std::span<const double> phi, std::span<double> dphi) const {
    exact_.rhs(phi, dphi);
    std::vector<double> extra(phi.size());
    second_.eval(phi, extra);
    for (std::size_t k = 0; k < phi.size(); ++k) dphi[k] += extra[k];
}

Eigen::MatrixXd HybridSecondOrder::jacobian(std::span<const double> phi) const {
    Eigen::MatrixXd J = exact_.jacobian(phi);
    second_.add_jacobian(phi, J);
    return J;
}

std::vector<SystemSpec> default_sync_systems() {
    return {SystemSpec::full_system(), SystemSpec::reduced({1, ReductionOrder::kExact}), SystemSpec::reduced({2, 0}),
            SystemSpec::reduced({2, 1}), SystemSpec::reduced({2, 2})};
}

std::vector<SystemSpec> default_splay_systems() {
    return {SystemSpec::full_system(), SystemSpec::reduced({1, ReductionOrder::kExact}), SystemSpec::reduced({2, 2})};
}

std::vector<SweepRow> sweep_sync(const ExperimentConfig& cfg) { return sweep_sync_impl(cfg, true); }
std::vector<SweepRow> sweep_sync_serial(const ExperimentConfig& cfg) { return sweep_sync_impl(cfg, false); }
std::vector<SweepRow> sweep_splay(const ExperimentConfig& cfg) { return sweep_splay_impl(cfg, true); }
std::vector<SweepRow> sweep_splay_serial(const ExperimentConfig& cfg) { return sweep_splay_impl(cfg, false); }

std::vector<SweepRow> floquet_sync(const ExperimentConfig& cfg) {
    ExperimentConfig point = cfg;
    point.delta_grid = {cfg.params.delta, cfg.params.delta, 1};
    point.K_grid = {cfg.params.K, cfg.params.K, 1};
    return sweep_sync_serial(point);
}

std::vector<SweepRow> floquet_splay(const ExperimentConfig& cfg) {
    ExperimentConfig point = cfg;
    point.delta_grid = {cfg.params.delta, cfg.params.delta, 1};
    point.K_grid = {cfg.params.K, cfg.params.K, 1};
    return sweep_splay_serial(point);
}

FullState torus_point(const Model& model, std::span<const double> phi, double settle_time, double tol) {
    const std::size_t n = model.size();
    if (phi.size() != n) throw std::invalid_argument("phase vector length differs from network size");
    const FullSystem field(model);
    const IntegratorOptions opts{tol, tol * 1e-2};
    std::vector<double> psi(n);
    for (std::size_t k = 0; k < n; ++k) psi[k] = phi[k] - model.params.omega * settle_time;

    const auto nn = static_cast<Eigen::Index>(n);
    for (int it = 0; it < 30; ++it) {
        std::vector<double> x0(2 * n, 1.0);
        std::copy(psi.begin(), psi.end(), x0.begin() + static_cast<std::ptrdiff_t>(n));
        const auto var = flow_with_variations(field, x0, settle_time, opts);
        Eigen::VectorXd res(nn);
        double err = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            res(static_cast<Eigen::Index>(k)) = wrap_angle(var.x[n + k] - phi[k]);
            err = std::max(err, std::abs(res(static_cast<Eigen::Index>(k))));
        }
        if (err < 1e-12) {
            FullState s;
            s.R.assign(var.x.begin(), var.x.begin() + static_cast<std::ptrdiff_t>(n));
            s.phi.assign(phi.begin(), phi.end());
            return s;
        }
        const Eigen::MatrixXd J = var.phi.bottomRightCorner(nn, nn);
        const Eigen::VectorXd step = J.partialPivLu().solve(-res);
        for (std::size_t k = 0; k < n; ++k) psi[k] += step(static_cast<Eigen::Index>(k));
    }
    throw NumericalError("could not locate the torus point with the requested phases");
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope needs at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(std::abs(x[i])), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<ConvergenceRow> run_convergence(const ExperimentConfig& cfg) {
    const std::size_t n = cfg.network.size();
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> angle(0.0, kTwoPi);
    std::vector<std::vector<double>> points(static_cast<std::size_t>(cfg.convergence_points), std::vector<double>(n));
    for (auto& p : points) {
        for (auto& v : p) v = angle(rng);
    }
    const double settle = 30.0 / std::abs(cfg.params.m);
    const double tol = std::min(cfg.tol, 1e-11);

    std::vector<ConvergenceRow> rows;
    for (double delta : cfg.convergence_delta) {
        const std::vector<std::string> labels = {"(0,0)", delta == 0.0 ? "(1,0)" : "(1,inf)",
                                                 delta == 0.0 ? "(2,0)" : "(2,2)+(1,inf)"};
        std::vector<std::vector<double>> errors(labels.size(), std::vector<double>(cfg.convergence_K.size(), 0.0));
        for (std::size_t ki = 0; ki < cfg.convergence_K.size(); ++ki) {
            const Params p = with_point(cfg.params, cfg.convergence_K[ki], delta);
            const Model model{p, cfg.g, cfg.network};
            std::vector<std::unique_ptr<VectorField>> reduced;
            reduced.push_back(std::make_unique<ReducedSystem>(assemble(cfg.network, p, cfg.g, {0, 0})));
            if (delta == 0.0) {
                reduced.push_back(std::make_unique<ReducedSystem>(assemble(cfg.network, p, cfg.g, {1, 0})));
                reduced.push_back(std::make_unique<ReducedSystem>(assemble(cfg.network, p, cfg.g, {2, 0})));
            } else {
                reduced.push_back(
                    std::make_unique<ReducedSystem>(assemble(cfg.network, p, cfg.g, {1, ReductionOrder::kExact})));
                reduced.push_back(std::make_unique<HybridSecondOrder>(cfg.network, p, cfg.g));
            }
            std::vector<std::vector<double>> per_point(points.size(), std::vector<double>(labels.size(), 0.0));
            std::string failure;
#pragma omp parallel for schedule(dynamic)
            for (std::size_t pi = 0; pi < points.size(); ++pi) {
                try {
                    const FullState s = torus_point(model, points[pi], settle, tol);
                    const FullState v = full_rhs(s, model);
                    std::vector<double> red(n);
                    for (std::size_t r = 0; r < reduced.size(); ++r) {
                        reduced[r]->rhs(s.phi, red);
                        double e = 0.0;
                        for (std::size_t k = 0; k < n; ++k) e = std::max(e, std::abs(v.phi[k] - red[k]));
                        per_point[pi][r] = e;
                    }
                } catch (const std::exception& e) {
#pragma omp critical
                    failure = e.what();
                }
            }
            if (!failure.empty()) throw NumericalError("convergence experiment failed: " + failure);
            for (const auto& pp : per_point) {
                for (std::size_t r = 0; r < labels.size(); ++r) errors[r][ki] = std::max(errors[r][ki], pp[r]);
            }
        }
        for (std::size_t r = 0; r < labels.size(); ++r) {
            const double slope =
                cfg.convergence_K.size() >= 2 ? loglog_slope(cfg.convergence_K, errors[r]) : kNaN;
            for (std::size_t ki = 0; ki < cfg.convergence_K.size(); ++ki) {
                rows.push_back({delta, labels[r], cfg.convergence_K[ki], errors[r][ki], slope});
            }
        }
    }
    return rows;
}

double torus_distance(const Model& model, double horizon, double tol, std::uint64_t seed) {
    const std::size_t n = model.size();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, kTwoPi);
    std::vector<double> phi(n);
    for (auto& v : phi) v = angle(rng);
    const FullState start = torus_point(model, phi, 30.0 / std::abs(model.params.m), tol);
    const TorusExpansion torus = compute_torus(model.network, model.params, model.shape, 2);

    std::vector<double> times;
    for (double t = 0.0; t <= horizon; t += 0.05) times.push_back(t);
    const FullSystem field(model);
    const auto traj = sample(field, start.flat(), times, {tol, tol * 1e-2});
    double worst = 0.0;
    for (const auto& x : traj) {
        const std::span<const double> ph(x.data() + n, n);
        for (std::size_t k = 0; k < n; ++k) {
            worst = std::max(worst, std::abs(x[k] - torus.radius(k, ph, model.params.K, model.params.delta)));
        }
    }
    return worst;
}

Trajectory simulate(const ExperimentConfig& cfg, const SystemSpec& spec) {
    const std::size_t n = cfg.network.size();
    std::vector<double> phi = cfg.initial_phi;
    if (phi.empty()) {
        std::mt19937_64 rng(cfg.seed);
        std::uniform_real_distribution<double> angle(0.0, kTwoPi);
        phi.resize(n);
        for (auto& v : phi) v = angle(rng);
    }
    std::vector<double> x0;
    if (spec.full) {
        x0 = cfg.initial_R.empty() ? std::vector<double>(n, 1.0) : cfg.initial_R;
    }
    x0.insert(x0.end(), phi.begin(), phi.end());
    const auto field = make_system(cfg, spec, cfg.params.K, cfg.params.delta);
    Trajectory traj;
    const auto steps = static_cast<std::size_t>(std::floor(cfg.t_end / cfg.dt_out + 1e-9));
    for (std::size_t i = 0; i <= steps; ++i) traj.t.push_back(static_cast<double>(i) * cfg.dt_out);
    traj.x = sample(*field, x0, traj.t, orbit_integrator(cfg));
    return traj;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {
std::string quoted(const std::string& s) {
    return s.find(',') == std::string::npos ? s : "\"" + s + "\"";
}
} // namespace

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "delta,K,system,period,prmm_re,prmm_im,prmm_abs,converged\n";
    for (const auto& r : rows) {
        out << format_double(r.delta) << ',' << format_double(r.K) << ',' << quoted(r.system) << ','
            << format_double(r.period) << ',' << format_double(r.prmm.real()) << ',' << format_double(r.prmm.imag())
            << ',' << format_double(std::abs(r.prmm)) << ',' << (r.converged ? 1 : 0) << '\n';
    }
}

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
    out << "delta,system,K,error,slope\n";
    for (const auto& r : rows) {
        out << format_double(r.delta) << ',' << quoted(r.system) << ',' << format_double(r.K) << ','
            << format_double(r.error) << ',' << format_double(r.slope) << '\n';
    }
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, std::size_t n, bool full) {
    out << 't';
    if (full) {
        for (std::size_t k = 1; k <= n; ++k) out << ",R" << k;
    }
    for (std::size_t k = 1; k <= n; ++k) out << ",phi" << k;
    out << '\n';
    for (std::size_t i = 0; i < traj.t.size(); ++i) {
        out << format_double(traj.t[i]);
        for (double v : traj.x[i]) out << ',' << format_double(v);
        out << '\n';
    }
}

} // namespace phasered
