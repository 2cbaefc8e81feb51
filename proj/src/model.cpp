#include "phasered/model.hpp"

#include <cmath>
#include <stdexcept>

#include "phasered/errors.hpp"

namespace phasered {

void Params::validate() const {
    for (double v : {omega, m, alpha, K, delta}) {
        if (!std::isfinite(v)) throw ConfigError("parameters must be finite");
    }
    if (!(omega > 0.0)) throw ConfigError("omega must be > 0");
    if (!(m < 0.0)) throw ConfigError("m must be < 0");
    if (!(std::abs(delta) < 1.0)) throw ConfigError("|delta| must be < 1");
}

// ---------------------------------------------------------------------------
// ShapeFn

ShapeFn::ShapeFn(std::vector<Harmonic> harmonics) : harmonics_(std::move(harmonics)) {
    for (const auto& h : harmonics_) {
        if (h.n < 1) throw ConfigError("shape harmonics need n >= 1 (g must have zero mean)");
        if (!std::isfinite(h.a) || !std::isfinite(h.b)) throw ConfigError("shape coefficients must be finite");
    }
}

ShapeFn ShapeFn::scaled(double gamma) const {
    std::vector<Harmonic> hs = harmonics_;
    for (auto& h : hs) {
        h.a *= gamma;
        h.b *= gamma;
    }
    return ShapeFn(std::move(hs));
}

double ShapeFn::value(double phi) const {
    double s = 0.0;
    for (const auto& h : harmonics_) s += h.a * std::cos(h.n * phi) + h.b * std::sin(h.n * phi);
    return s;
}

double ShapeFn::derivative(double phi) const {
    double s = 0.0;
    for (const auto& h : harmonics_) s += h.n * (h.b * std::cos(h.n * phi) - h.a * std::sin(h.n * phi));
    return s;
}

double ShapeFn::second_derivative(double phi) const {
    double s = 0.0;
    for (const auto& h : harmonics_) {
        s -= h.n * h.n * (h.a * std::cos(h.n * phi) + h.b * std::sin(h.n * phi));
    }
    return s;
}

TrigPoly ShapeFn::as_poly(std::size_t n, std::size_t index) const {
    TrigPoly p(n);
    for (const auto& h : harmonics_) {
        const auto k = FreqVector::unit(index, h.n);
        p += TrigPoly::cos_mode(n, k, 0.0, h.a) + TrigPoly::sin_mode(n, k, 0.0, h.b);
    }
    return p;
}

TrigPoly ShapeFn::derivative_poly(std::size_t n, std::size_t index) const {
    TrigPoly p(n);
    for (const auto& h : harmonics_) {
        const auto k = FreqVector::unit(index, h.n);
        p += TrigPoly::cos_mode(n, k, 0.0, h.n * h.b) - TrigPoly::sin_mode(n, k, 0.0, h.n * h.a);
    }
    return p;
}

// ---------------------------------------------------------------------------
// Network

Network::Network(Eigen::MatrixXd adjacency) : a_(std::move(adjacency)) {
    if (a_.rows() != a_.cols()) throw ConfigError("adjacency matrix must be square");
    if (!a_.allFinite()) throw ConfigError("adjacency entries must be finite");
}

Network Network::all_to_all(std::size_t n) {
    const auto s = static_cast<Eigen::Index>(n);
    return Network(Eigen::MatrixXd::Ones(s, s));
}

Network Network::empty(std::size_t n) {
    const auto s = static_cast<Eigen::Index>(n);
    return Network(Eigen::MatrixXd::Zero(s, s));
}

double Network::degree(std::size_t k) const { return a_.row(static_cast<Eigen::Index>(k)).sum(); }

bool Network::is_all_to_all() const { return (a_.array() == 1.0).all(); }

bool Network::is_symmetric() const { return a_ == a_.transpose(); }

// ---------------------------------------------------------------------------
// FullState

FullState FullState::from_flat(std::span<const double> x) {
    if (x.size() % 2 != 0) throw std::invalid_argument("flat full state must have even length");
    const std::size_t n = x.size() / 2;
    return FullState{{x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n)},
                     {x.begin() + static_cast<std::ptrdiff_t>(n), x.end()}};
}

std::vector<double> FullState::flat() const {
    std::vector<double> x(R);
    x.insert(x.end(), phi.begin(), phi.end());
    return x;
}

// ---------------------------------------------------------------------------
// Dynamics

namespace {

// Shape factor u = 1 + delta g(phi) and its phase derivatives.
struct Shape {
    double u, du, ddu;
};

Shape shape_at(double phi, const Params& p, const ShapeFn& g) {
    const Shape s{1.0 + p.delta * g.value(phi), p.delta * g.derivative(phi), p.delta * g.second_derivative(phi)};
    if (!(s.u > 0.0)) throw DomainError("1 + delta*g(phi) must be positive");
    return s;
}

std::vector<Shape> shapes(std::span<const double> phi, const Model& model) {
    std::vector<Shape> out;
    out.reserve(phi.size());
    for (double v : phi) out.push_back(shape_at(v, model.params, model.shape));
    return out;
}

void check_size(std::size_t flat_size, const Model& model) {
    if (flat_size != 2 * model.size()) throw std::invalid_argument("state size does not match network size");
}

} // namespace

std::pair<double, double> single_rhs(double r, double phi, const Params& p, const ShapeFn& g) {
    const double gv = g.value(phi);
    const double u = 1.0 + p.delta * gv;
    if (!(u > 0.0)) throw DomainError("1 + delta*g(phi) must be positive");
    const double dr = p.delta * g.derivative(phi) * p.omega * r / u + p.m * r * r * (r - 1.0 - p.delta * gv);
    return {dr, p.omega};
}

void full_rhs(std::span<const double> x, std::span<double> dx, const Model& model) {
    check_size(x.size(), model);
    const std::size_t n = model.size();
    const Params& p = model.params;
    const auto R = x.first(n);
    const auto phi = x.subspan(n, n);
    const auto sh = shapes(phi, model);
    const double ca = std::cos(p.alpha);
    const double sa = std::sin(p.alpha);
    const double scale = p.K / static_cast<double>(n);

    for (std::size_t k = 0; k < n; ++k) {
        if (!(R[k] > 0.0)) throw DomainError("transformed radius must be positive");
        const auto [uk, duk, dduk] = sh[k];
        double G = 0.0;
        double H = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
            const double a = model.network(k, l);
            if (a == 0.0) continue;
            const double theta = phi[l] - phi[k] + p.alpha;
            const double s = std::sin(theta);
            const double c = std::cos(theta);
            const double ul = sh[l].u;
            G += a * (R[l] * ul / uk * c - R[k] * ca - duk * (R[l] * ul / (uk * uk) * s - R[k] * sa / uk));
            H += a * (R[l] * ul / (R[k] * uk) * s - sa);
        }
        dx[k] = p.m * R[k] * R[k] * (R[k] - 1.0) * uk * uk + scale * G;
        dx[n + k] = p.omega + scale * H;
    }
}

FullState full_rhs(const FullState& state, const Model& model) {
    const auto x = state.flat();
    std::vector<double> dx(x.size());
    full_rhs(x, dx, model);
    return FullState::from_flat(dx);
}

Eigen::MatrixXd full_jacobian(std::span<const double> x, const Model& model) {
    check_size(x.size(), model);
    const std::size_t n = model.size();
    const Params& p = model.params;
    const auto R = x.first(n);
    const auto phi = x.subspan(n, n);
    const auto sh = shapes(phi, model);
    const double ca = std::cos(p.alpha);
    const double sa = std::sin(p.alpha);
    const double scale = p.K / static_cast<double>(n);
    const auto N = static_cast<Eigen::Index>(n);

    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * N, 2 * N);
    for (std::size_t k = 0; k < n; ++k) {
        const auto ki = static_cast<Eigen::Index>(k);
        const auto [uk, duk, dduk] = sh[k];
        const double Rk = R[k];
        J(ki, ki) += p.m * (3.0 * Rk * Rk - 2.0 * Rk) * uk * uk;
        J(ki, N + ki) += p.m * Rk * Rk * (Rk - 1.0) * 2.0 * uk * duk;

        for (std::size_t l = 0; l < n; ++l) {
            const double a = model.network(k, l);
            if (a == 0.0) continue;
            const auto li = static_cast<Eigen::Index>(l);
            const double theta = phi[l] - phi[k] + p.alpha;
            const double s = std::sin(theta);
            const double c = std::cos(theta);
            const double Rl = R[l];
            const double ul = sh[l].u;
            const double dul = sh[l].du;
            const double w = scale * a;
            const double uk2 = uk * uk;

            // G_k: the l-slot and k-slot partials are added separately so self-loops work.
            J(ki, li) += w * (ul / uk * c - duk * ul / uk2 * s);
            J(ki, ki) += w * (-ca + duk * sa / uk);
            J(ki, N + li) += w * (Rl * (dul / uk * c - ul / uk * s) - duk * Rl * (dul / uk2 * s + ul / uk2 * c));
            J(ki, N + ki) += w * (Rl * (-ul * duk / uk2 * c + ul / uk * s) -
                                  Rl * ul * ((dduk / uk2 - 2.0 * duk * duk / (uk2 * uk)) * s - duk / uk2 * c) +
                                  Rk * sa * (dduk / uk - duk * duk / uk2));

            // H_k
            J(N + ki, li) += w * ul * s / (Rk * uk);
            J(N + ki, ki) += -w * Rl * ul * s / (Rk * Rk * uk);
            J(N + ki, N + li) += w * Rl / Rk * (dul / uk * s + ul / uk * c);
            J(N + ki, N + ki) += w * Rl / Rk * (-ul * duk / uk2 * s - ul / uk * c);
        }
    }
    return J;
}

Eigen::MatrixXd full_jacobian(const FullState& state, const Model& model) {
    return full_jacobian(state.flat(), model);
}

void unit_radius_phase_rhs(std::span<const double> phi, std::span<double> dphi, const Model& model) {
    const std::size_t n = model.size();
    const Params& p = model.params;
    const auto sh = shapes(phi, model);
    const double sa = std::sin(p.alpha);
    const double scale = p.K / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
        double H = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
            const double a = model.network(k, l);
            if (a == 0.0) continue;
            H += a * (sh[l].u / sh[k].u * std::sin(phi[l] - phi[k] + p.alpha) - sa);
        }
        dphi[k] = p.omega + scale * H;
    }
}

Eigen::MatrixXd unit_radius_phase_jacobian(std::span<const double> phi, const Model& model) {
    const std::size_t n = model.size();
    const Params& p = model.params;
    const auto sh = shapes(phi, model);
    const double scale = p.K / static_cast<double>(n);
    const auto N = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(N, N);
    for (std::size_t k = 0; k < n; ++k) {
        const auto ki = static_cast<Eigen::Index>(k);
        const auto [uk, duk, dduk] = sh[k];
        for (std::size_t l = 0; l < n; ++l) {
            const double a = model.network(k, l);
            if (a == 0.0) continue;
            const auto li = static_cast<Eigen::Index>(l);
            const double theta = phi[l] - phi[k] + p.alpha;
            const double s = std::sin(theta);
            const double c = std::cos(theta);
            const double w = scale * a;
            J(ki, li) += w * (sh[l].du / uk * s + sh[l].u / uk * c);
            J(ki, ki) += w * (-sh[l].u * duk / (uk * uk) * s - sh[l].u / uk * c);
        }
    }
    return J;
}

double to_transformed(double r, double phi, double delta, const ShapeFn& g) {
    const double u = 1.0 + delta * g.value(phi);
    if (!(u > 0.0)) throw DomainError("1 + delta*g(phi) must be positive");
    return r / u;
}

double from_transformed(double R, double phi, double delta, const ShapeFn& g) {
    const double u = 1.0 + delta * g.value(phi);
    if (!(u > 0.0)) throw DomainError("1 + delta*g(phi) must be positive");
    return R * u;
}

std::vector<std::complex<double>> cartesian_rhs(std::span<const std::complex<double>> states, const Model& model) {
    const std::size_t n = model.size();
    if (states.size() != n) throw std::invalid_argument("state size does not match network size");
    const Params& p = model.params;
    const std::complex<double> coupling = p.K * std::polar(1.0, p.alpha) / static_cast<double>(n);
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double r = std::abs(states[k]);
        if (r == 0.0) throw DomainError("phase undefined at zero amplitude");
        const double phi = std::arg(states[k]);
        const auto [dr, dphi] = single_rhs(r, phi, p, model.shape);
        std::complex<double> sum{};
        for (std::size_t l = 0; l < n; ++l) sum += model.network(k, l) * (states[l] - states[k]);
        out[k] = std::complex<double>(dr, r * dphi) * std::polar(1.0, phi) + coupling * sum;
    }
    return out;
}

} // namespace phasered
