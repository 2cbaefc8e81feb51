#ifndef PHASERED_EXPERIMENTS_HPP
#define PHASERED_EXPERIMENTS_HPP

#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "phasered/config.hpp"
#include "phasered/stability.hpp"

namespace phasered {

/// One output row of the Floquet commands.
struct SweepRow {
    double delta = 0.0;
    double K = 0.0;
    std::string system;
    double period = 0.0;
    Complex prmm{0.0, 0.0};
    bool converged = false;
    std::string reason;  ///< why the row is not converged
};

/// Vector field of `spec` at (K, delta); reduced systems reuse the memoized P terms.
std::unique_ptr<VectorField> make_system(const ExperimentConfig& cfg, const SystemSpec& spec, double K, double delta);

/// First-order terms exact in delta plus K^2 sum_{j<=2} delta^j P^(2,j). Used where the
/// O(K delta^3) remainder of a plain (2,2)-reduction would mask the K^3 error.
class HybridSecondOrder final : public VectorField {
public:
    HybridSecondOrder(const Network& net, const Params& p, const ShapeFn& g);

    std::size_t dim() const override { return exact_.dim(); }
    std::size_t phase_begin() const override { return 0; }
    void rhs(std::span<const double> phi, std::span<double> dphi) const override;
    Eigen::MatrixXd jacobian(std::span<const double> phi) const override;
    std::string name() const override { return "(2,2)+(1,inf)"; }

private:
    ReducedSystem exact_;
    CompiledPhasePolys second_;
};

/// Grid sweeps over (delta, K) for every configured system. The _serial variants are the
/// straightforward reference loops; the others distribute grid points over OpenMP threads.
/// Both return rows ordered by (delta index, K index, system index).
std::vector<SweepRow> sweep_sync(const ExperimentConfig& cfg);
std::vector<SweepRow> sweep_sync_serial(const ExperimentConfig& cfg);
std::vector<SweepRow> sweep_splay(const ExperimentConfig& cfg);
std::vector<SweepRow> sweep_splay_serial(const ExperimentConfig& cfg);

/// Single-point versions at cfg.params.K / cfg.params.delta.
std::vector<SweepRow> floquet_sync(const ExperimentConfig& cfg);
std::vector<SweepRow> floquet_splay(const ExperimentConfig& cfg);

std::vector<SystemSpec> default_sync_systems();
std::vector<SystemSpec> default_splay_systems();

/// Point on the attracting torus of the full system whose phases equal phi: the trajectory
/// is started near the torus and the start phases are corrected by Newton's method.
FullState torus_point(const Model& model, std::span<const double> phi, double settle_time, double tol);

struct ConvergenceRow {
    double delta = 0.0;
    std::string system;
    double K = 0.0;
    double error = 0.0;
    double slope = 0.0;  ///< least-squares slope of log(error) against log(K) for this (delta, system)
};

/// Phase-velocity error of reductions against the full dynamics on the torus, maximized over
/// cfg.convergence_points seeded phase vectors. At delta != 0 the first-order reduction is
/// (1,inf) and the second-order one is HybridSecondOrder.
std::vector<ConvergenceRow> run_convergence(const ExperimentConfig& cfg);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// Max distance over [0, horizon] between the full system's radii on the torus and the
/// predicted 1 + K sum_{j<=2} delta^j R^(1,j)(phi(t)).
double torus_distance(const Model& model, double horizon, double tol, std::uint64_t seed);

/// Trajectory rows (t, R..., phi...) of the full system or phases of a reduction.
struct Trajectory {
    std::vector<double> t;
    std::vector<std::vector<double>> x;
};
Trajectory simulate(const ExperimentConfig& cfg, const SystemSpec& spec);

/// 17 significant digits; NaN printed as "nan".
std::string format_double(double v);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows);
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, std::size_t n, bool full);

} // namespace phasered

#endif
