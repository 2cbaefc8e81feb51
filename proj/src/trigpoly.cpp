#include "phasered/trigpoly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "phasered/errors.hpp"

namespace phasered {

// ---------------------------------------------------------------------------
// FreqVector

FreqVector::FreqVector(std::initializer_list<Entry> entries) : entries_(entries) { normalize(); }

FreqVector::FreqVector(std::vector<Entry> entries) : entries_(std::move(entries)) { normalize(); }

FreqVector FreqVector::unit(std::size_t index, int freq) {
    return FreqVector{{static_cast<std::uint32_t>(index), freq}};
}

void FreqVector::normalize() {
    std::sort(entries_.begin(), entries_.end(),
              [](const Entry& a, const Entry& b) { return a.first < b.first; });
    std::vector<Entry> merged;
    merged.reserve(entries_.size());
    for (const auto& e : entries_) {
        if (!merged.empty() && merged.back().first == e.first) {
            merged.back().second += e.second;
        } else {
            merged.push_back(e);
        }
    }
    std::erase_if(merged, [](const Entry& e) { return e.second == 0; });
    entries_ = std::move(merged);
    total_ = 0;
    for (const auto& e : entries_) total_ += e.second;
}

int FreqVector::operator[](std::size_t index) const {
    for (const auto& [i, f] : entries_) {
        if (i == index) return f;
        if (i > index) break;
    }
    return 0;
}

int FreqVector::order() const {
    int s = 0;
    for (const auto& e : entries_) s += std::abs(e.second);
    return s;
}

std::size_t FreqVector::extent() const {
    return entries_.empty() ? 0 : static_cast<std::size_t>(entries_.back().first) + 1;
}

FreqVector FreqVector::operator+(const FreqVector& other) const {
    std::vector<Entry> out;
    out.reserve(entries_.size() + other.entries_.size());
    auto a = entries_.begin();
    auto b = other.entries_.begin();
    while (a != entries_.end() || b != other.entries_.end()) {
        if (b == other.entries_.end() || (a != entries_.end() && a->first < b->first)) {
            out.push_back(*a++);
        } else if (a == entries_.end() || b->first < a->first) {
            out.push_back(*b++);
        } else {
            const int f = a->second + b->second;
            if (f != 0) out.emplace_back(a->first, f);
            ++a;
            ++b;
        }
    }
    FreqVector r;
    r.entries_ = std::move(out);
    for (const auto& e : r.entries_) r.total_ += e.second;
    return r;
}

FreqVector FreqVector::operator-() const {
    FreqVector r = *this;
    for (auto& e : r.entries_) e.second = -e.second;
    r.total_ = -total_;
    return r;
}

std::strong_ordering FreqVector::operator<=>(const FreqVector& other) const {
    if (auto c = order() <=> other.order(); c != 0) return c;
    return entries_ <=> other.entries_;
}

double FreqVector::dot(std::span<const double> phases) const {
    double s = 0.0;
    for (const auto& [i, f] : entries_) s += f * phases[i];
    return s;
}

std::string FreqVector::to_string() const {
    if (entries_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [i, f] : entries_) {
        if (f < 0) {
            os << (first ? "-" : " - ");
        } else if (!first) {
            os << " + ";
        }
        if (std::abs(f) != 1) os << std::abs(f);
        os << "p" << i;
        first = false;
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// TrigPoly

TrigPoly TrigPoly::constant(std::size_t n, double value) {
    TrigPoly p(n);
    p.add_term(FreqVector{}, value);
    p.canonicalize();
    return p;
}

TrigPoly TrigPoly::exp_pair(std::size_t n, const FreqVector& k, Complex c) {
    if (k.extent() > n) throw std::out_of_range("frequency index exceeds oscillator count");
    TrigPoly p(n);
    if (k.is_zero()) {
        p.add_term(k, 2.0 * c.real());
    } else {
        p.add_term(k, c);
        p.add_term(-k, std::conj(c));
    }
    p.canonicalize();
    return p;
}

TrigPoly TrigPoly::cos_mode(std::size_t n, const FreqVector& k, double shift, double amplitude) {
    // cos(x + s) = (e^{is} e^{ix} + c.c.)/2
    return exp_pair(n, k, 0.5 * amplitude * std::polar(1.0, shift));
}

TrigPoly TrigPoly::sin_mode(std::size_t n, const FreqVector& k, double shift, double amplitude) {
    // sin(x + s) = (e^{is} e^{ix} - c.c.)/(2i)
    return exp_pair(n, k, Complex(0.0, -0.5) * amplitude * std::polar(1.0, shift));
}

TrigPoly TrigPoly::from_terms(std::size_t n, TermMap terms) {
    TrigPoly p(n);
    for (const auto& [k, c] : terms) {
        if (k.extent() > n) throw std::out_of_range("frequency index exceeds oscillator count");
    }
    p.terms_ = std::move(terms);
    p.canonicalize();
    return p;
}

Complex TrigPoly::coefficient(const FreqVector& k) const {
    auto it = terms_.find(k);
    return it == terms_.end() ? Complex{} : it->second;
}

int TrigPoly::max_abs_total() const {
    int m = 0;
    for (const auto& [k, c] : terms_) m = std::max(m, std::abs(k.total()));
    return m;
}

double TrigPoly::l1_norm() const {
    double s = 0.0;
    for (const auto& [k, c] : terms_) s += std::abs(c);
    return s;
}

void TrigPoly::add_term(const FreqVector& k, Complex c) {
    if (c == Complex{}) return;
    auto [it, inserted] = terms_.try_emplace(k, c);
    if (!inserted) it->second += c;
}

void TrigPoly::canonicalize() {
    // Project onto the Hermitian part (c_n + conj(c_{-n}))/2, then prune.
    TermMap sym;
    for (const auto& [k, c] : terms_) {
        sym[k] += 0.5 * c;
        sym[-k] += 0.5 * std::conj(c);
    }
    std::erase_if(sym, [](const auto& kv) { return std::abs(kv.second) < kPruneThreshold; });
    terms_ = std::move(sym);
}

void TrigPoly::check_dims(const TrigPoly& other) const {
    if (n_ != other.n_) {
        throw std::invalid_argument("TrigPoly dimension mismatch: " + std::to_string(n_) + " vs " +
                                    std::to_string(other.n_));
    }
}

TrigPoly& TrigPoly::operator+=(const TrigPoly& other) {
    check_dims(other);
    for (const auto& [k, c] : other.terms_) add_term(k, c);
    canonicalize();
    return *this;
}

TrigPoly& TrigPoly::operator-=(const TrigPoly& other) {
    check_dims(other);
    for (const auto& [k, c] : other.terms_) add_term(k, -c);
    canonicalize();
    return *this;
}

TrigPoly& TrigPoly::operator*=(double s) {
    for (auto& [k, c] : terms_) c *= s;
    canonicalize();
    return *this;
}

TrigPoly TrigPoly::operator+(const TrigPoly& other) const {
    TrigPoly r = *this;
    r += other;
    return r;
}

TrigPoly TrigPoly::operator-(const TrigPoly& other) const {
    TrigPoly r = *this;
    r -= other;
    return r;
}

TrigPoly TrigPoly::operator-() const { return *this * -1.0; }

TrigPoly TrigPoly::operator*(double s) const {
    TrigPoly r = *this;
    r *= s;
    return r;
}

TrigPoly TrigPoly::operator*(const TrigPoly& other) const {
    check_dims(other);
    TrigPoly r(n_);
    for (const auto& [ka, ca] : terms_) {
        for (const auto& [kb, cb] : other.terms_) r.add_term(ka + kb, ca * cb);
    }
    r.canonicalize();
    return r;
}

TrigPoly TrigPoly::derivative(std::size_t index) const {
    TrigPoly r(n_);
    for (const auto& [k, c] : terms_) {
        const int f = k[index];
        if (f != 0) r.add_term(k, Complex(0.0, f) * c);
    }
    r.canonicalize();
    return r;
}

TrigPoly TrigPoly::directional_derivative() const {
    TrigPoly r(n_);
    for (const auto& [k, c] : terms_) {
        if (k.total() != 0) r.add_term(k, Complex(0.0, k.total()) * c);
    }
    r.canonicalize();
    return r;
}

TrigPoly TrigPoly::shifted(double c) const {
    TrigPoly r(n_);
    for (const auto& [k, coeff] : terms_) r.add_term(k, coeff * std::polar(1.0, k.total() * c));
    r.canonicalize();
    return r;
}

Complex TrigPoly::eval_complex(std::span<const double> phases) const {
    if (phases.size() != n_) throw std::invalid_argument("phase vector length does not match TrigPoly");
    Complex s{};
    for (const auto& [k, c] : terms_) s += c * std::polar(1.0, k.dot(phases));
    return s;
}

double TrigPoly::eval(std::span<const double> phases) const {
    const Complex s = eval_complex(phases);
    if (std::abs(s.imag()) > 1e-12 * std::max(1.0, l1_norm())) {
        throw std::logic_error("TrigPoly evaluation has non-negligible imaginary part");
    }
    return s.real();
}

bool TrigPoly::is_hermitian(double tol) const {
    for (const auto& [k, c] : terms_) {
        if (std::abs(coefficient(-k) - std::conj(c)) > tol) return false;
    }
    return true;
}

bool TrigPoly::approx_equal(const TrigPoly& other, double tol) const {
    if (n_ != other.n_) return false;
    for (const auto& [k, c] : terms_) {
        if (std::abs(c - other.coefficient(k)) > tol) return false;
    }
    for (const auto& [k, c] : other.terms_) {
        if (std::abs(c - coefficient(k)) > tol) return false;
    }
    return true;
}

std::string TrigPoly::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    os.precision(12);
    bool first = true;
    for (const auto& [k, c] : terms_) {
        if (!first) os << " + ";
        os << "(" << c.real() << (c.imag() < 0 ? "-" : "+") << std::abs(c.imag()) << "i)";
        if (!k.is_zero()) os << "*exp(i(" << k.to_string() << "))";
        first = false;
    }
    return os.str();
}

nlohmann::json TrigPoly::to_json() const {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [k, c] : terms_) {
        nlohmann::json modes = nlohmann::json::array();
        for (const auto& [i, f] : k.entries()) modes.push_back({i, f});
        terms.push_back({{"modes", modes}, {"re", c.real()}, {"im", c.imag()}});
    }
    return {{"n", n_}, {"terms", terms}};
}

TrigPoly TrigPoly::from_json(const nlohmann::json& j) {
    TrigPoly p(j.at("n").get<std::size_t>());
    for (const auto& t : j.at("terms")) {
        std::vector<FreqVector::Entry> entries;
        for (const auto& m : t.at("modes")) entries.emplace_back(m.at(0).get<std::uint32_t>(), m.at(1).get<int>());
        FreqVector k(std::move(entries));
        if (k.extent() > p.n_) throw std::out_of_range("mode index exceeds oscillator count");
        p.add_term(k, Complex(t.at("re").get<double>(), t.at("im").get<double>()));
    }
    p.canonicalize();
    return p;
}

TrigPoly resolvent_solve(const TrigPoly& rhs, double m, double omega) {
    if (m == 0.0) throw SingularOperatorError("resolvent solve requires m != 0");
    // The denominator of -n is the conjugate of that of n, so Hermitian pairing survives.
    TrigPoly::TermMap out;
    for (const auto& [k, s] : rhs.terms()) out.emplace(k, s / Complex(-m, omega * k.total()));
    return TrigPoly::from_terms(rhs.num_oscillators(), std::move(out));
}

// ---------------------------------------------------------------------------
// DeltaSeries

DeltaSeries::DeltaSeries(std::size_t num_oscillators, int truncation)
    : n_(num_oscillators), orders_(static_cast<std::size_t>(truncation) + 1, TrigPoly(num_oscillators)) {
    if (truncation < 0) throw std::invalid_argument("DeltaSeries truncation must be >= 0");
}

DeltaSeries DeltaSeries::constant(std::size_t n, int truncation, const TrigPoly& p) {
    return monomial(n, truncation, p, 0);
}

DeltaSeries DeltaSeries::monomial(std::size_t n, int truncation, const TrigPoly& p, int order) {
    DeltaSeries s(n, truncation);
    if (order <= truncation) s[order] = p;
    return s;
}

DeltaSeries DeltaSeries::operator+(const DeltaSeries& other) const {
    DeltaSeries r = *this;
    r += other;
    return r;
}

DeltaSeries& DeltaSeries::operator+=(const DeltaSeries& other) {
    if (other.truncation() != truncation()) throw std::invalid_argument("DeltaSeries truncation mismatch");
    for (int j = 0; j <= truncation(); ++j) (*this)[j] += other[j];
    return *this;
}

DeltaSeries DeltaSeries::operator-(const DeltaSeries& other) const { return *this + other * -1.0; }

DeltaSeries DeltaSeries::operator*(double s) const {
    DeltaSeries r = *this;
    for (auto& p : r.orders_) p *= s;
    return r;
}

DeltaSeries DeltaSeries::operator*(const DeltaSeries& other) const {
    if (other.truncation() != truncation()) throw std::invalid_argument("DeltaSeries truncation mismatch");
    DeltaSeries r(n_, truncation());
    for (int a = 0; a <= truncation(); ++a) {
        if ((*this)[a].is_zero()) continue;
        for (int b = 0; a + b <= truncation(); ++b) {
            if (other[b].is_zero()) continue;
            r[a + b] += (*this)[a] * other[b];
        }
    }
    return r;
}

DeltaSeries DeltaSeries::inverse_of_one_plus(std::size_t n, int truncation, const TrigPoly& g) {
    // 1/(1 + delta g) = sum_j (-g)^j delta^j
    DeltaSeries s(n, truncation);
    TrigPoly power = TrigPoly::constant(n, 1.0);
    for (int j = 0; j <= truncation; ++j) {
        s[j] = power;
        power = power * g * -1.0;
    }
    return s;
}

double DeltaSeries::eval(std::span<const double> phases, double delta) const {
    double s = 0.0;
    double w = 1.0;
    for (const auto& p : orders_) {
        s += w * p.eval(phases);
        w *= delta;
    }
    return s;
}

} // namespace phasered
