#include "phasered/reduction.hpp"

#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "phasered/errors.hpp"

namespace phasered {

// ---------------------------------------------------------------------------
// ReductionOrder

void ReductionOrder::validate() const {
    if (a < 0 || a > 2) throw ConfigError("reduction order in K must be 0, 1 or 2");
    if (b == kExact) {
        if (a != 1) throw ConfigError("delta-exact reduction is only defined for first order in K");
        return;
    }
    if (b < 0 || b > 2) throw ConfigError("reduction order in delta must be 0, 1, 2 or inf");
}

std::string ReductionOrder::label() const {
    return "(" + std::to_string(a) + "," + (delta_exact() ? std::string("inf") : std::to_string(b)) + ")";
}

ReductionOrder ReductionOrder::parse(const std::string& text) {
    std::string t;
    for (char c : text) {
        if (c != '(' && c != ')' && c != ' ') t.push_back(c);
    }
    const auto comma = t.find(',');
    if (comma == std::string::npos) throw ConfigError("reduction order must look like (a,b): " + text);
    ReductionOrder o;
    try {
        o.a = std::stoi(t.substr(0, comma));
        const std::string b = t.substr(comma + 1);
        o.b = (b == "inf" || b == "infinity") ? kExact : std::stoi(b);
    } catch (const std::logic_error&) {
        throw ConfigError("cannot parse reduction order: " + text);
    }
    o.validate();
    return o;
}

double TorusExpansion::radius(std::size_t k, std::span<const double> phi, double K, double delta) const {
    double s = 0.0;
    double w = 1.0;
    for (int j = 0;; ++j) {
        auto it = terms.find({1, j});
        if (it == terms.end()) break;
        s += w * it->second.at(k).eval(phi);
        w *= delta;
    }
    return 1.0 + K * s;
}

// ---------------------------------------------------------------------------
// Series building blocks

namespace {

// sin/cos(phi_l - phi_k + shift) on the N-torus.
FreqVector diff_mode(std::size_t l, std::size_t k) {
    return FreqVector{{static_cast<std::uint32_t>(l), 1}, {static_cast<std::uint32_t>(k), -1}};
}

struct SeriesContext {
    std::size_t n;
    int trunc;
    const Network& net;
    const Params& p;
    std::vector<DeltaSeries> u;      // 1 + delta g_k
    std::vector<DeltaSeries> inv_u;  // 1 / (1 + delta g_k)
    std::vector<DeltaSeries> du;     // delta g'_k

    SeriesContext(const Network& network, const Params& params, const ShapeFn& g, int truncation)
        : n(network.size()), trunc(truncation), net(network), p(params) {
        const TrigPoly one = TrigPoly::constant(n, 1.0);
        for (std::size_t k = 0; k < n; ++k) {
            const TrigPoly gk = g.as_poly(n, k);
            u.push_back(DeltaSeries::constant(n, trunc, one) + DeltaSeries::monomial(n, trunc, gk, 1));
            inv_u.push_back(DeltaSeries::inverse_of_one_plus(n, trunc, gk));
            du.push_back(DeltaSeries::monomial(n, trunc, g.derivative_poly(n, k), 1));
        }
    }

    DeltaSeries constant(const TrigPoly& t) const { return DeltaSeries::constant(n, trunc, t); }
    DeltaSeries constant(double c) const { return constant(TrigPoly::constant(n, c)); }

    DeltaSeries rho(std::size_t l, std::size_t k) const { return u[l] * inv_u[k]; }
    DeltaSeries sin_lk(std::size_t l, std::size_t k) const {
        return constant(TrigPoly::sin_mode(n, diff_mode(l, k), p.alpha));
    }
    DeltaSeries cos_lk(std::size_t l, std::size_t k) const {
        return constant(TrigPoly::cos_mode(n, diff_mode(l, k), p.alpha));
    }

    // G_k(1, phi)
    DeltaSeries coupling_G(std::size_t k) const {
        DeltaSeries G(n, trunc);
        const DeltaSeries ca = constant(std::cos(p.alpha));
        const DeltaSeries sa = constant(std::sin(p.alpha));
        for (std::size_t l = 0; l < n; ++l) {
            const double a = net(k, l);
            if (a == 0.0) continue;
            const DeltaSeries r = rho(l, k);
            G += (r * cos_lk(l, k) - ca - du[k] * inv_u[k] * (r * sin_lk(l, k) - sa)) * a;
        }
        return G * (1.0 / static_cast<double>(n));
    }

    // F_R(1, phi_k) = m (1 + delta g_k)^2
    DeltaSeries radial_rate(std::size_t k) const { return u[k] * u[k] * p.m; }

    // H_k(1, phi)
    DeltaSeries first_order(std::size_t k) const {
        DeltaSeries P(n, trunc);
        const DeltaSeries sa = constant(std::sin(p.alpha));
        for (std::size_t l = 0; l < n; ++l) {
            const double a = net(k, l);
            if (a == 0.0) continue;
            P += (rho(l, k) * sin_lk(l, k) - sa) * a;
        }
        return P * (1.0 / static_cast<double>(n));
    }

    // dH_k/dR_l at R = 1
    std::vector<DeltaSeries> grad_H(std::size_t k) const {
        std::vector<DeltaSeries> row(n, DeltaSeries(n, trunc));
        DeltaSeries diag(n, trunc);
        for (std::size_t l = 0; l < n; ++l) {
            const double a = net(k, l);
            if (a == 0.0) continue;
            const DeltaSeries term = rho(l, k) * sin_lk(l, k) * a;
            row[l] += term;
            diag += term;
        }
        row[k] = row[k] - diag;
        for (auto& e : row) e = e * (1.0 / static_cast<double>(n));
        return row;
    }

    // R^(1,j) for all oscillators, order by order; result[k] holds the series.
    std::vector<DeltaSeries> torus() const {
        std::vector<DeltaSeries> R(n, DeltaSeries(n, trunc));
        for (std::size_t k = 0; k < n; ++k) {
            const DeltaSeries G = coupling_G(k);
            const DeltaSeries FR = radial_rate(k);
            for (int j = 0; j <= trunc; ++j) {
                TrigPoly src = G[j];
                for (int i = 1; i <= j; ++i) src += FR[i] * R[k][j - i];
                R[k][j] = resolvent_solve(src, p.m, p.omega);
            }
        }
        return R;
    }
};

void require_nonsingular(const Params& p) {
    if (p.m == 0.0) throw SingularOperatorError("torus expansion requires m != 0");
}

void require_order(int j) {
    if (j < 0 || j > 2) throw std::invalid_argument("delta order must be in 0..2");
}

// --- memoization of P terms -------------------------------------------------

std::string cache_key(const Network& net, const Params& p, const ShapeFn& g) {
    std::ostringstream os;
    os.precision(17);
    os << net.size() << ':';
    const auto& a = net.adjacency();
    for (Eigen::Index i = 0; i < a.size(); ++i) os << a.data()[i] << ',';
    os << '|' << p.omega << ',' << p.m << ',' << p.alpha << '|';
    for (const auto& h : g.harmonics()) os << h.n << ',' << h.a << ',' << h.b << ';';
    return os.str();
}

struct PCache {
    std::mutex mutex;
    std::map<std::string, PTermMap> entries;
};

PCache& p_cache() {
    static PCache cache;
    return cache;
}

} // namespace

std::vector<TrigPoly> r1_source(const Network& net, const Params& p, const ShapeFn& g, int j,
                                const std::vector<std::vector<TrigPoly>>& lower) {
    require_order(j);
    if (lower.size() < static_cast<std::size_t>(j)) throw std::invalid_argument("missing lower-order torus terms");
    const SeriesContext ctx(net, p, g, j);
    std::vector<TrigPoly> out;
    for (std::size_t k = 0; k < ctx.n; ++k) {
        const DeltaSeries G = ctx.coupling_G(k);
        const DeltaSeries FR = ctx.radial_rate(k);
        TrigPoly src = G[j];
        for (int i = 1; i <= j; ++i) src += FR[i] * lower[static_cast<std::size_t>(j - i)][k];
        out.push_back(std::move(src));
    }
    return out;
}

std::vector<TrigPoly> compute_R1(const Network& net, const Params& p, const ShapeFn& g, int j) {
    require_order(j);
    require_nonsingular(p);
    const SeriesContext ctx(net, p, g, j);
    std::vector<TrigPoly> out;
    for (const auto& s : ctx.torus()) out.push_back(s[j]);
    return out;
}

TorusExpansion compute_torus(const Network& net, const Params& p, const ShapeFn& g, int max_j) {
    require_order(max_j);
    require_nonsingular(p);
    const SeriesContext ctx(net, p, g, max_j);
    const auto R = ctx.torus();
    TorusExpansion t;
    for (int j = 0; j <= max_j; ++j) {
        auto& v = t.terms[{1, j}];
        for (const auto& s : R) v.push_back(s[j]);
    }
    return t;
}

std::vector<std::vector<TrigPoly>> compute_gradH(const Network& net, const Params& p, const ShapeFn& g, int j) {
    require_order(j);
    const SeriesContext ctx(net, p, g, j);
    std::vector<std::vector<TrigPoly>> rows;
    for (std::size_t k = 0; k < ctx.n; ++k) {
        std::vector<TrigPoly> row;
        for (const auto& e : ctx.grad_H(k)) row.push_back(e[j]);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<TrigPoly> compute_P(const Network& net, const Params& p, const ShapeFn& g, int n, int j) {
    require_order(j);
    if (n != 1 && n != 2) throw std::invalid_argument("P terms exist for K orders 1 and 2");
    const std::string key = cache_key(net, p, g);
    auto& cache = p_cache();
    {
        std::lock_guard lock(cache.mutex);
        auto it = cache.entries.find(key);
        if (it != cache.entries.end()) {
            auto t = it->second.find({n, j});
            if (t != it->second.end()) return t->second;
        }
    }

    if (n == 2) require_nonsingular(p);
    const SeriesContext ctx(net, p, g, j);
    PTermMap fresh;
    std::vector<DeltaSeries> P1;
    for (std::size_t k = 0; k < ctx.n; ++k) P1.push_back(ctx.first_order(k));
    for (int i = 0; i <= j; ++i) {
        auto& v = fresh[{1, i}];
        for (const auto& s : P1) v.push_back(s[i]);
    }
    if (n == 2) {
        const auto R = ctx.torus();
        std::vector<DeltaSeries> P2;
        for (std::size_t k = 0; k < ctx.n; ++k) {
            const auto grad = ctx.grad_H(k);
            DeltaSeries acc(ctx.n, j);
            for (std::size_t l = 0; l < ctx.n; ++l) acc += grad[l] * R[l];
            P2.push_back(std::move(acc));
        }
        for (int i = 0; i <= j; ++i) {
            auto& v = fresh[{2, i}];
            for (const auto& s : P2) v.push_back(s[i]);
        }
    }

    std::lock_guard lock(cache.mutex);
    auto& slot = cache.entries[key];
    for (auto& [k, v] : fresh) slot.emplace(k, std::move(v));
    return slot.at({n, j});
}

// ---------------------------------------------------------------------------
// CompiledPhasePolys

CompiledPhasePolys::CompiledPhasePolys(const std::vector<TrigPoly>& polys) {
    if (polys.empty()) return;
    n_ = polys.front().num_oscillators();
    for (const auto& poly : polys) {
        std::vector<Term> row;
        for (const auto& [k, c] : poly.terms()) {
            // Keep one representative per Hermitian pair: Re(c z^n) counted twice.
            if (!k.is_zero() && k.entries().front().second < 0) continue;
            Term t{std::vector<int>(n_, 0), k.is_zero() ? c : 2.0 * c};
            for (const auto& [i, f] : k.entries()) {
                t.freq[i] = f;
                max_freq_ = std::max(max_freq_, std::abs(f));
            }
            row.push_back(std::move(t));
        }
        rows_.push_back(std::move(row));
    }
}

void CompiledPhasePolys::powers(std::span<const double> phi, std::vector<Complex>& table) const {
    const std::size_t width = 2 * static_cast<std::size_t>(max_freq_) + 1;
    table.assign(n_ * width, Complex(1.0, 0.0));
    for (std::size_t j = 0; j < n_; ++j) {
        const Complex z = std::polar(1.0, phi[j]);
        Complex* row = table.data() + j * width + max_freq_;
        for (int f = 1; f <= max_freq_; ++f) {
            row[f] = row[f - 1] * z;
            row[-f] = std::conj(row[f]);
        }
    }
}

void CompiledPhasePolys::eval(std::span<const double> phi, std::span<double> out) const {
    if (rows_.empty()) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
    }
    std::vector<Complex> table;
    powers(phi, table);
    const std::size_t width = 2 * static_cast<std::size_t>(max_freq_) + 1;
    for (std::size_t k = 0; k < rows_.size(); ++k) {
        double s = 0.0;
        for (const auto& t : rows_[k]) {
            Complex z = t.coeff;
            for (std::size_t j = 0; j < n_; ++j) {
                if (t.freq[j] != 0) z *= table[j * width + static_cast<std::size_t>(t.freq[j] + max_freq_)];
            }
            s += z.real();
        }
        out[k] = s;
    }
}

void CompiledPhasePolys::add_jacobian(std::span<const double> phi, Eigen::MatrixXd& J, double weight) const {
    if (rows_.empty()) return;
    std::vector<Complex> table;
    powers(phi, table);
    const std::size_t width = 2 * static_cast<std::size_t>(max_freq_) + 1;
    for (std::size_t k = 0; k < rows_.size(); ++k) {
        for (const auto& t : rows_[k]) {
            Complex z = t.coeff;
            for (std::size_t j = 0; j < n_; ++j) {
                if (t.freq[j] != 0) z *= table[j * width + static_cast<std::size_t>(t.freq[j] + max_freq_)];
            }
            // d/dphi_j Re(z) = Re(i f_j z) = -f_j Im(z)
            for (std::size_t j = 0; j < n_; ++j) {
                if (t.freq[j] != 0) {
                    J(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) -= weight * t.freq[j] * z.imag();
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// ReducedSystem

ReducedSystem::ReducedSystem(Network net, Params p, ShapeFn g, ReductionOrder order,
                             std::shared_ptr<const PTermMap> p_terms)
    : network_(std::move(net)), params_(p), shape_(std::move(g)), order_(order), p_terms_(std::move(p_terms)) {
    order_.validate();
    if (order_.delta_exact()) {
        exact_model_ = Model{params_, shape_, network_};
    } else {
        const std::size_t n = network_.size();
        std::vector<TrigPoly> combined(n, TrigPoly(n));
        for (const auto& [key, polys] : *p_terms_) {
            const auto [kn, kj] = key;
            if (kn > order_.a || kj > order_.b) continue;
            const double w = std::pow(params_.K, kn) * std::pow(params_.delta, kj);
            if (w == 0.0) continue;
            for (std::size_t k = 0; k < n; ++k) combined[k] += polys[k] * w;
        }
        combined_ = CompiledPhasePolys(combined);
    }
}

void ReducedSystem::rhs(std::span<const double> phi, std::span<double> dphi) const {
    if (order_.delta_exact()) {
        unit_radius_phase_rhs(phi, dphi, exact_model_);
        return;
    }
    combined_.eval(phi, dphi);
    for (auto& v : dphi) v += params_.omega;
}

Eigen::MatrixXd ReducedSystem::jacobian(std::span<const double> phi) const {
    if (order_.delta_exact()) return unit_radius_phase_jacobian(phi, exact_model_);
    const auto n = static_cast<Eigen::Index>(network_.size());
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    combined_.add_jacobian(phi, J);
    return J;
}

ReducedSystem ReducedSystem::with_coupling(double K, double delta) const {
    Params p = params_;
    p.K = K;
    p.delta = delta;
    return ReducedSystem(network_, p, shape_, order_, p_terms_);
}

nlohmann::json ReducedSystem::to_json() const {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [key, polys] : *p_terms_) {
        if (key.first > order_.a || (!order_.delta_exact() && key.second > order_.b)) continue;
        nlohmann::json per = nlohmann::json::array();
        for (const auto& p : polys) per.push_back(p.to_json());
        terms.push_back({{"n", key.first}, {"j", key.second}, {"oscillators", per}});
    }
    return {{"order", order_.label()},
            {"omega", params_.omega},
            {"delta_exact_first_order", order_.delta_exact()},
            {"p_terms", terms}};
}

ReducedSystem assemble(const Network& net, const Params& p, const ShapeFn& g, ReductionOrder order) {
    order.validate();
    auto terms = std::make_shared<PTermMap>();
    if (order.delta_exact()) {
        // The closed-form evaluator is used; the polynomial parts are kept for export only.
        for (int j = 0; j <= 2; ++j) (*terms)[{1, j}] = compute_P(net, p, g, 1, j);
    } else {
        for (int n = 1; n <= order.a; ++n) {
            for (int j = 0; j <= order.b; ++j) (*terms)[{n, j}] = compute_P(net, p, g, n, j);
        }
    }
    return ReducedSystem(net, p, g, order, std::move(terms));
}

// ---------------------------------------------------------------------------
// Closed-form oracles

std::vector<double> meanfield_20_rhs(std::span<const double> phi, const Params& p) {
    const double n = static_cast<double>(phi.size());
    Complex z1{}, z2{};
    for (double v : phi) {
        z1 += std::polar(1.0, v);
        z2 += std::polar(1.0, 2.0 * v);
    }
    z1 /= n;
    z2 /= n;
    const double R = std::abs(z1), Psi = std::arg(z1);
    const double Q = std::abs(z2), Theta = std::arg(z2);
    const double a = p.alpha;
    std::vector<double> out;
    out.reserve(phi.size());
    for (double pk : phi) {
        const double first = p.K * R * std::sin(Psi - pk + a) - p.K * std::sin(a);
        const double second = p.K * p.K / (2.0 * p.m) *
                              (R * Q * std::sin(Psi + pk - Theta) - R * std::sin(Psi - pk + 2.0 * a) +
                               R * R * std::sin(2.0 * Psi - 2.0 * pk + 2.0 * a));
        out.push_back(p.omega + first + second);
    }
    return out;
}

Params LeonPazoParams::to_params(double omega, double delta) const {
    Params p;
    p.omega = omega;
    p.m = -2.0;
    p.K = eps * std::abs(Complex(1.0, c1));
    p.alpha = std::arg(Complex(1.0, c1));
    p.delta = delta;
    return p;
}

std::vector<TrigPoly> appendix_R11_harmonic(int n, HarmonicKind kind, const Network& net, const Params& p) {
    if (n <= 0) throw std::invalid_argument("harmonic index must be >= 1");
    const std::size_t N = net.size();
    const double a = p.alpha;
    const double w = n * p.omega;
    const double prefactor = 1.0 / (2.0 * static_cast<double>(N) * (p.m * p.m + w * w));

    std::vector<TrigPoly> out;
    for (std::size_t k = 0; k < N; ++k) {
        TrigPoly acc(N);
        for (std::size_t l = 0; l < N; ++l) {
            const double akl = net(k, l);
            if (akl == 0.0) continue;
            const auto mode = [&](int fk, int fl) {
                return FreqVector{{static_cast<std::uint32_t>(k), fk}, {static_cast<std::uint32_t>(l), fl}};
            };
            // (coefficient, k-frequency, l-frequency, shift) of each cos/sin pair in s1.
            struct Piece {
                double c;
                int fk, fl;
                double shift;
            };
            const Piece pieces[] = {
                {double(n - 2), n, 0, -a},      {-1.0, 1, -(n + 1), -a},       {-double(n - 3), n + 1, -1, -a},
                {-1.0, 1, n - 1, -a},           {-double(n + 2), n, 0, a},     {double(n + 3), n - 1, 1, a},
            };
            // The second piece flips sign between the cos-part and the sin-part of s1.
            TrigPoly s1(N);
            for (std::size_t i = 0; i < 6; ++i) {
                const Piece& pc = pieces[i];
                const FreqVector f = mode(pc.fk, pc.fl);
                const double msign = (i == 1) ? -1.0 : 1.0;
                if (kind == HarmonicKind::Sin) {
                    s1 += TrigPoly::cos_mode(N, f, pc.shift, w * pc.c);
                    s1 += TrigPoly::sin_mode(N, f, pc.shift, p.m * pc.c * msign);
                } else {
                    s1 += TrigPoly::sin_mode(N, f, pc.shift, -w * pc.c * msign);
                    s1 += TrigPoly::cos_mode(N, f, pc.shift, p.m * pc.c);
                }
            }
            acc += s1 * akl;
        }
        out.push_back(acc * prefactor);
    }
    return out;
}

} // namespace phasered
