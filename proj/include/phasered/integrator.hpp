#ifndef PHASERED_INTEGRATOR_HPP
#define PHASERED_INTEGRATOR_HPP

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "phasered/vector_field.hpp"

namespace phasered {

struct IntegratorOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double initial_step = 0.0;  ///< 0: chosen automatically
    double max_step = 0.0;      ///< 0: unbounded
    std::size_t max_steps = 5'000'000;
};

using OdeRhs = std::function<void(double t, std::span<const double> x, std::span<double> dx)>;

/// One accepted step of the Dormand-Prince pair with its continuous extension.
class DenseStep {
public:
    double t0 = 0.0;
    double t1 = 0.0;

    /// State at t in [t0, t1] from the fourth-order interpolant.
    void eval(double t, std::span<double> out) const;

private:
    friend class Dopri5;
    std::vector<double> r_;  // 5 blocks of size dim
};

/// Called after each accepted step.
using StepObserver = std::function<void(const DenseStep&)>;

struct IntegrationStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evals = 0;
};

/// Adaptive explicit Runge-Kutta 5(4) of Dormand and Prince with FSAL and dense output.
/// Integrates backwards in time when t1 < t0.
class Dopri5 {
public:
    explicit Dopri5(IntegratorOptions opts = {}) : opts_(opts) {}

    /// Throws StiffnessError on step-size underflow, NumericalError on non-finite state
    /// or when the step budget is exhausted.
    std::vector<double> integrate(const OdeRhs& f, std::span<const double> x0, double t0, double t1,
                                  const StepObserver& observer = {});

    const IntegrationStats& stats() const { return stats_; }
    const IntegratorOptions& options() const { return opts_; }

private:
    IntegratorOptions opts_;
    IntegrationStats stats_;
};

/// Adapter for autonomous vector fields.
OdeRhs autonomous(const VectorField& field);

/// x(t) of an autonomous field.
std::vector<double> flow(const VectorField& field, std::span<const double> x0, double t,
                         const IntegratorOptions& opts = {});

/// States at the requested times (non-decreasing, all >= 0) starting from x0 at t = 0.
std::vector<std::vector<double>> sample(const VectorField& field, std::span<const double> x0,
                                        std::span<const double> times, const IntegratorOptions& opts = {});

struct VariationalResult {
    std::vector<double> x;  ///< x(T)
    Eigen::MatrixXd phi;    ///< fundamental matrix Phi(T), Phi(0) = I
};

/// Integrates x' = f(x), Phi' = Df(x) Phi as one augmented system.
VariationalResult flow_with_variations(const VectorField& field, std::span<const double> x0, double T,
                                       const IntegratorOptions& opts = {});

} // namespace phasered

#endif
