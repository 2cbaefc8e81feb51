#ifndef PHASERED_TRIGPOLY_HPP
#define PHASERED_TRIGPOLY_HPP

#include <compare>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace phasered {

using Complex = std::complex<double>;

/// Coefficients below this modulus are dropped after every arithmetic op.
inline constexpr double kPruneThreshold = 1e-14;

/// Integer frequency vector n of a Fourier mode exp(i n.phi) on the N-torus.
/// Stored sparsely as (oscillator index, nonzero frequency) pairs sorted by index.
class FreqVector {
public:
    using Entry = std::pair<std::uint32_t, int>;

    FreqVector() = default;
    FreqVector(std::initializer_list<Entry> entries);
    explicit FreqVector(std::vector<Entry> entries);

    static FreqVector unit(std::size_t index, int freq = 1);

    int operator[](std::size_t index) const;
    const std::vector<Entry>& entries() const { return entries_; }
    bool is_zero() const { return entries_.empty(); }

    /// Sum of all frequencies; the eigenvalue of the diagonal direction derivative is i*total.
    int total() const { return total_; }
    /// Sum of absolute frequencies (the trigonometric order).
    int order() const;
    /// Largest stored index + 1, or 0 for the zero vector.
    std::size_t extent() const;

    FreqVector operator+(const FreqVector& other) const;
    FreqVector operator-() const;
    FreqVector operator-(const FreqVector& other) const { return *this + (-other); }

    /// Canonical order: (order, then entries lexicographically).
    std::strong_ordering operator<=>(const FreqVector& other) const;
    bool operator==(const FreqVector& other) const { return entries_ == other.entries_; }

    double dot(std::span<const double> phases) const;
    std::string to_string() const;

private:
    void normalize();

    std::vector<Entry> entries_;
    int total_ = 0;
};

/// Real-valued sparse trigonometric polynomial on the N-torus, stored in the complex
/// exponential basis with Hermitian pairing: coeff(-n) == conj(coeff(n)).
class TrigPoly {
public:
    using TermMap = std::map<FreqVector, Complex>;

    explicit TrigPoly(std::size_t num_oscillators = 0) : n_(num_oscillators) {}

    static TrigPoly constant(std::size_t n, double value);
    /// c exp(i k.phi) + conj(c) exp(-i k.phi); for k = 0 this is the constant 2 Re(c).
    static TrigPoly exp_pair(std::size_t n, const FreqVector& k, Complex c);
    /// Takes ownership of raw terms and restores the Hermitian/pruned invariants.
    static TrigPoly from_terms(std::size_t n, TermMap terms);
    /// amplitude * cos(k.phi + shift)
    static TrigPoly cos_mode(std::size_t n, const FreqVector& k, double shift = 0.0, double amplitude = 1.0);
    /// amplitude * sin(k.phi + shift)
    static TrigPoly sin_mode(std::size_t n, const FreqVector& k, double shift = 0.0, double amplitude = 1.0);

    std::size_t num_oscillators() const { return n_; }
    std::size_t size() const { return terms_.size(); }
    bool is_zero() const { return terms_.empty(); }
    const TermMap& terms() const { return terms_; }
    Complex coefficient(const FreqVector& k) const;
    /// Largest |sum of frequencies| over stored modes.
    int max_abs_total() const;
    /// Sum of coefficient moduli; bounds |eval| everywhere.
    double l1_norm() const;

    TrigPoly& operator+=(const TrigPoly& other);
    TrigPoly& operator-=(const TrigPoly& other);
    TrigPoly& operator*=(double s);
    TrigPoly operator+(const TrigPoly& other) const;
    TrigPoly operator-(const TrigPoly& other) const;
    TrigPoly operator-() const;
    TrigPoly operator*(const TrigPoly& other) const;
    TrigPoly operator*(double s) const;
    friend TrigPoly operator*(double s, const TrigPoly& p) { return p * s; }

    /// Partial derivative with respect to phi_index.
    TrigPoly derivative(std::size_t index) const;
    /// grad(p) . (1,...,1); mode n picks up the factor i*total(n).
    TrigPoly directional_derivative() const;
    /// Substitutes phi -> phi + c*1.
    TrigPoly shifted(double c) const;

    double eval(std::span<const double> phases) const;
    /// Raw complex sum; its imaginary part is the Hermitian residue.
    Complex eval_complex(std::span<const double> phases) const;

    bool is_hermitian(double tol = 0.0) const;
    bool approx_equal(const TrigPoly& other, double tol) const;

    /// Human-readable terms in canonical order.
    std::string to_string() const;

    nlohmann::json to_json() const;
    static TrigPoly from_json(const nlohmann::json& j);

private:
    void add_term(const FreqVector& k, Complex c);
    void canonicalize();
    void check_dims(const TrigPoly& other) const;

    std::size_t n_;
    TermMap terms_;
};

/// Solves m*R + rhs = omega * grad(R).1 mode by mode: r_n = s_n / (i*omega*total(n) - m).
/// Throws SingularOperatorError when m == 0.
TrigPoly resolvent_solve(const TrigPoly& rhs, double m, double omega);

/// Power series in delta with TrigPoly coefficients, truncated after delta^truncation.
class DeltaSeries {
public:
    DeltaSeries(std::size_t num_oscillators, int truncation);
    static DeltaSeries constant(std::size_t n, int truncation, const TrigPoly& p);
    /// p * delta^order (dropped if order > truncation).
    static DeltaSeries monomial(std::size_t n, int truncation, const TrigPoly& p, int order);

    int truncation() const { return static_cast<int>(orders_.size()) - 1; }
    std::size_t num_oscillators() const { return n_; }
    const TrigPoly& operator[](int j) const { return orders_.at(static_cast<std::size_t>(j)); }
    TrigPoly& operator[](int j) { return orders_.at(static_cast<std::size_t>(j)); }

    DeltaSeries operator+(const DeltaSeries& other) const;
    DeltaSeries operator-(const DeltaSeries& other) const;
    DeltaSeries operator*(const DeltaSeries& other) const;
    DeltaSeries operator*(double s) const;
    DeltaSeries& operator+=(const DeltaSeries& other);

    /// Multiplicative inverse of 1 + delta*g as a truncated geometric series.
    static DeltaSeries inverse_of_one_plus(std::size_t n, int truncation, const TrigPoly& g);

    double eval(std::span<const double> phases, double delta) const;

private:
    std::size_t n_;
    std::vector<TrigPoly> orders_;
};

} // namespace phasered

#endif
