#ifndef PHASERED_MODEL_HPP
#define PHASERED_MODEL_HPP

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "phasered/trigpoly.hpp"

namespace phasered {

/// Physical parameters of the oscillator network.
struct Params {
    double omega = 1.0;  ///< angular velocity, > 0
    double m = -1.0;     ///< radial attraction rate, < 0
    double alpha = 0.0;  ///< phase lag
    double K = 0.0;      ///< coupling strength, any sign
    double delta = 0.0;  ///< shape deviation, |delta| < 1

    /// Throws ConfigError unless omega > 0, m < 0, |delta| < 1 and all values finite.
    void validate() const;
};

/// Zero-mean Fourier description of the limit-cycle deformation g(phi).
class ShapeFn {
public:
    struct Harmonic {
        int n;     ///< >= 1
        double a;  ///< cos(n phi) coefficient
        double b;  ///< sin(n phi) coefficient
        bool operator==(const Harmonic&) const = default;
    };

    ShapeFn() = default;
    explicit ShapeFn(std::vector<Harmonic> harmonics);

    static ShapeFn zero() { return ShapeFn{}; }
    static ShapeFn sine(int n = 1, double amplitude = 1.0) { return ShapeFn({{n, 0.0, amplitude}}); }
    static ShapeFn cosine(int n = 1, double amplitude = 1.0) { return ShapeFn({{n, amplitude, 0.0}}); }

    const std::vector<Harmonic>& harmonics() const { return harmonics_; }
    bool is_zero() const { return harmonics_.empty(); }
    ShapeFn scaled(double gamma) const;

    double value(double phi) const;
    double derivative(double phi) const;
    double second_derivative(double phi) const;

    /// g(phi_index) as a polynomial on the N-torus.
    TrigPoly as_poly(std::size_t n, std::size_t index) const;
    /// g'(phi_index) as a polynomial on the N-torus.
    TrigPoly derivative_poly(std::size_t n, std::size_t index) const;

    bool operator==(const ShapeFn&) const = default;

private:
    std::vector<Harmonic> harmonics_;
};

/// Weighted, possibly directed coupling graph a_kl (row k receives from column l).
class Network {
public:
    Network() = default;
    explicit Network(Eigen::MatrixXd adjacency);

    static Network all_to_all(std::size_t n);
    static Network empty(std::size_t n);

    std::size_t size() const { return static_cast<std::size_t>(a_.rows()); }
    double operator()(std::size_t k, std::size_t l) const { return a_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)); }
    const Eigen::MatrixXd& adjacency() const { return a_; }

    /// Weighted out-degree deg(k) = sum_l a_kl.
    double degree(std::size_t k) const;
    bool is_all_to_all() const;
    bool is_symmetric() const;

    bool operator==(const Network& other) const { return a_ == other.a_; }

private:
    Eigen::MatrixXd a_;
};

/// Everything that defines the oscillator network dynamics.
struct Model {
    Params params;
    ShapeFn shape;
    Network network;

    std::size_t size() const { return network.size(); }
};

/// Full-system state in transformed coordinates; flat layout is (R_1..R_N, phi_1..phi_N).
struct FullState {
    std::vector<double> R;
    std::vector<double> phi;

    static FullState from_flat(std::span<const double> x);
    std::vector<double> flat() const;
    std::size_t size() const { return R.size(); }
};

/// Radial and angular velocity of a single uncoupled oscillator in polar coordinates.
std::pair<double, double> single_rhs(double r, double phi, const Params& p, const ShapeFn& g);

/// (dR, dphi) of the transformed network system.
FullState full_rhs(const FullState& state, const Model& model);
/// Flat-layout version used by the integrators; dx must have length 2N.
void full_rhs(std::span<const double> x, std::span<double> dx, const Model& model);
/// Analytic 2N x 2N Jacobian in (R, phi) ordering.
Eigen::MatrixXd full_jacobian(std::span<const double> x, const Model& model);
Eigen::MatrixXd full_jacobian(const FullState& state, const Model& model);

/// Phase velocity of the first-order reduction exact in delta: omega + K*H_k(1, phi).
void unit_radius_phase_rhs(std::span<const double> phi, std::span<double> dphi, const Model& model);
/// d/dphi of unit_radius_phase_rhs.
Eigen::MatrixXd unit_radius_phase_jacobian(std::span<const double> phi, const Model& model);

double to_transformed(double r, double phi, double delta, const ShapeFn& g);
double from_transformed(double R, double phi, double delta, const ShapeFn& g);

/// Cartesian right-hand side for complex amplitudes A_k.
std::vector<std::complex<double>> cartesian_rhs(std::span<const std::complex<double>> states, const Model& model);

} // namespace phasered

#endif
