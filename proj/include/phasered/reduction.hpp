#ifndef PHASERED_REDUCTION_HPP
#define PHASERED_REDUCTION_HPP

#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "phasered/model.hpp"
#include "phasered/trigpoly.hpp"
#include "phasered/vector_field.hpp"

namespace phasered {

/// Truncation orders of a phase reduction: a in K, b in delta.
struct ReductionOrder {
    static constexpr int kExact = -1;  ///< b = infinity: H_k(1, phi) evaluated exactly

    int a = 1;
    int b = 0;

    bool delta_exact() const { return b == kExact; }
    /// Throws ConfigError unless 0 <= a <= 2 and b in {0, 1, 2, inf} (inf only with a = 1).
    void validate() const;
    std::string label() const;
    /// Parses "(2,2)", "2,2", "1,inf".
    static ReductionOrder parse(const std::string& text);

    bool operator==(const ReductionOrder&) const = default;
};

using TermKey = std::pair<int, int>;  // (order in K, order in delta)
using PTermMap = std::map<TermKey, std::vector<TrigPoly>>;

/// Invariant-torus expansion: R_k^(1,j) for j = 0..truncation.
struct TorusExpansion {
    std::map<TermKey, std::vector<TrigPoly>> terms;

    /// 1 + K sum_j delta^j R_k^(1,j)(phi)
    double radius(std::size_t k, std::span<const double> phi, double K, double delta) const;
};

/// Source term of the order-delta^j equation m R + source = omega grad(R).1, with all
/// lower-order solutions folded in. lower[i][k] holds R_k^(1,i) for i < j.
std::vector<TrigPoly> r1_source(const Network& net, const Params& p, const ShapeFn& g, int j,
                                const std::vector<std::vector<TrigPoly>>& lower);

/// R_k^(1,j) for every oscillator k; throws SingularOperatorError for m == 0.
std::vector<TrigPoly> compute_R1(const Network& net, const Params& p, const ShapeFn& g, int j);
TorusExpansion compute_torus(const Network& net, const Params& p, const ShapeFn& g, int max_j);

/// Order-delta^j part of grad_R H_k at R = 1: rows[k][l] = dH_k/dR_l.
std::vector<std::vector<TrigPoly>> compute_gradH(const Network& net, const Params& p, const ShapeFn& g, int j);

/// P_k^(n,j) for n in {1,2}, j in {0,1,2}. Results are memoized on (net, omega, m, alpha, g, n, j).
std::vector<TrigPoly> compute_P(const Network& net, const Params& p, const ShapeFn& g, int n, int j);

/// Dense-frequency compiled form of a family of per-oscillator polynomials, for fast
/// evaluation of values and phase derivatives.
class CompiledPhasePolys {
public:
    CompiledPhasePolys() = default;
    explicit CompiledPhasePolys(const std::vector<TrigPoly>& polys);

    std::size_t size() const { return rows_.size(); }
    void eval(std::span<const double> phi, std::span<double> out) const;
    /// Adds d(poly_k)/d(phi_j) * weight into J(k, j).
    void add_jacobian(std::span<const double> phi, Eigen::MatrixXd& J, double weight = 1.0) const;

private:
    struct Term {
        std::vector<int> freq;
        Complex coeff;  // already doubled for non-zero modes
    };
    std::size_t n_ = 0;
    int max_freq_ = 0;
    std::vector<std::vector<Term>> rows_;

    void powers(std::span<const double> phi, std::vector<Complex>& table) const;
};

/// Assembled (a,b)-phase reduction: phi_k' = omega + sum_{n<=a, j<=b} K^n delta^j P_k^(n,j)(phi).
class ReducedSystem final : public VectorField {
public:
    ReducedSystem(Network net, Params p, ShapeFn g, ReductionOrder order,
                  std::shared_ptr<const PTermMap> p_terms);

    std::size_t dim() const override { return network_.size(); }
    std::size_t phase_begin() const override { return 0; }
    void rhs(std::span<const double> phi, std::span<double> dphi) const override;
    Eigen::MatrixXd jacobian(std::span<const double> phi) const override;
    std::string name() const override { return order_.label(); }

    /// Same P terms, different coupling strength / deformation.
    ReducedSystem with_coupling(double K, double delta) const;

    double omega() const { return params_.omega; }
    const ReductionOrder& order() const { return order_; }
    const Params& params() const { return params_; }
    const Network& network() const { return network_; }
    const ShapeFn& shape() const { return shape_; }
    const PTermMap& p_terms() const { return *p_terms_; }

    /// Canonical JSON of the P terms (sorted modes).
    nlohmann::json to_json() const;

private:
    Network network_;
    Params params_;
    ShapeFn shape_;
    ReductionOrder order_;
    std::shared_ptr<const PTermMap> p_terms_;
    CompiledPhasePolys combined_;
    Model exact_model_;  // used when the order is exact in delta
};

ReducedSystem assemble(const Network& net, const Params& p, const ShapeFn& g, ReductionOrder order);

/// (2,0) reduction of all-to-all coupling written with the order parameters
/// R e^{i Psi} = <e^{i phi}> and Q e^{i Theta} = <e^{2 i phi}>.
std::vector<double> meanfield_20_rhs(std::span<const double> phi, const Params& p);

/// Comparison point with globally coupled Stuart-Landau oscillators (c2 = 0).
struct LeonPazoParams {
    double eps = 0.0;
    double c1 = 0.0;

    /// K = eps |1 + i c1|, m = -2, alpha = arg(1 + i c1); omega and delta passed through.
    Params to_params(double omega, double delta = 0.0) const;
};

enum class HarmonicKind { Sin, Cos };

/// Closed-form R_k^(1,1) when g(phi) is a single harmonic sin(n phi) or cos(n phi).
std::vector<TrigPoly> appendix_R11_harmonic(int n, HarmonicKind kind, const Network& net, const Params& p);

} // namespace phasered

#endif
