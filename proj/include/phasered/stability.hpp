#ifndef PHASERED_STABILITY_HPP
#define PHASERED_STABILITY_HPP

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "phasered/integrator.hpp"
#include "phasered/model.hpp"
#include "phasered/reduction.hpp"
#include "phasered/vector_field.hpp"

namespace phasered {

enum class OrbitKind { Sync, Splay, Continued };

/// Initial point and period of a periodic orbit of some VectorField. Phases advance by
/// 2*pi per period.
struct PeriodicOrbit {
    std::vector<double> x0;
    double period = 0.0;
    OrbitKind kind = OrbitKind::Continued;
    double residual = 0.0;  ///< closure error in max norm, phases mod 2*pi
    int iterations = 0;     ///< Newton iterations spent
};

struct MonodromyResult {
    Eigen::MatrixXd matrix;
    std::vector<Complex> multipliers;
    std::size_t trivial_index = 0;
    Complex critical{1.0, 0.0};  ///< largest modulus among the non-trivial multipliers
    std::vector<Complex> exponents;
    double period = 0.0;
    double closure = 0.0;
};

/// Max-norm distance between x and y, phases compared modulo 2*pi.
double closure_error(const VectorField& field, std::span<const double> x, std::span<const double> y);

/// Eigen-analysis of a monodromy matrix; the trivial multiplier is the one whose eigenvector
/// is best aligned with flow_direction.
MonodromyResult analyze_monodromy(const Eigen::MatrixXd& phi, std::span<const double> flow_direction, double T);

/// Integrates the variational equation along the orbit. Throws OrbitNotClosedError when the
/// orbit fails to close to within closure_tol.
MonodromyResult monodromy(const VectorField& field, const PeriodicOrbit& orbit, const IntegratorOptions& opts = {},
                          double closure_tol = 1e-6);

/// Closed-form critical PRMM of the synchronized orbit for (1,0), (1,inf), (2,0), (2,1), (2,2).
/// (2,2) with delta != 0 requires g = sin(phi).
double prmm_sync_closed(ReductionOrder order, const Params& p, const ShapeFn& g = ShapeFn::sine());

/// Floquet exponents of the full system's synchronized orbit at delta = 0, ordered
/// q_1 = 0, q_{2..N} (+ branch), q_{N+1} = m, q_{N+2..2N} (- branch).
std::vector<Complex> full_sync_spectrum_delta0(const Params& p, std::size_t n);

/// Synchronized orbit through phase 0: R = 1 (full system), period 2*pi/omega.
PeriodicOrbit sync_orbit(const VectorField& field, double omega);

/// R* of the splay state at delta = 0; throws DomainError for a negative discriminant.
double splay_amplitude(const Params& p);
/// omega - K sin(alpha); throws DomainError when it vanishes.
double splay_frequency(const Params& p);

/// Splay orbit at delta = 0, phi_k = 2*pi*k/N. With full_state, the state is (R*.., phi..),
/// otherwise only the phases.
PeriodicOrbit splay_orbit_delta0(const Params& p, std::size_t n, bool full_state = true);

/// Non-trivial eigenvalues q_{2,3} of the (1,0) or (2,0) reduction at the N = 3 splay state.
std::array<Complex, 2> splay_eigs_reduced(ReductionOrder order, const Params& p);

struct ShootingOptions {
    IntegratorOptions integrator{1e-11, 1e-13};
    double tol = 1e-9;
    int max_iterations = 25;
    int max_halvings = 8;
};

/// Newton iteration on the Poincare section {first phase fixed}; unknowns are the remaining
/// coordinates and the return time.
PeriodicOrbit continue_orbit(const VectorField& field, const PeriodicOrbit& guess, const ShootingOptions& opts = {});

using FieldFamily = std::function<std::unique_ptr<VectorField>(double)>;

/// Follows an orbit along a parameter path, each solve seeded by the previous one.
/// Stops at the first failure; the returned vector then holds the converged prefix.
std::vector<PeriodicOrbit> continue_along(const FieldFamily& family, const PeriodicOrbit& seed,
                                          std::span<const double> path, const ShootingOptions& opts = {});

struct OrderParams {
    Complex Z;
    double R = 0.0;
    double Psi = 0.0;
    double Q = 0.0;
    double Theta = 0.0;
};

OrderParams order_parameter(std::span<const double> phi);

/// Contribution of one harmonic of g to h(gamma) in the (2,1) sync linearization
/// h(gamma) (1/N)(ones - N I).
double appendix_sync_floquet_correction(int n, HarmonicKind kind, const Params& p, double gamma);

struct UnitCrossing {
    double K_lo = 0.0;
    double K_hi = 0.0;
    bool complex_pair = false;  ///< the crossing multiplier has nonzero imaginary part on both sides
};

/// Grid intervals where the modulus of the critical multiplier crosses 1. Grid points with
/// |K| < mask or non-finite values are skipped.
std::vector<UnitCrossing> find_unit_crossings(std::span<const double> K, std::span<const Complex> critical,
                                              double mask = 1e-3);

} // namespace phasered

#endif
