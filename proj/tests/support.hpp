#ifndef PHASERED_TESTS_SUPPORT_HPP
#define PHASERED_TESTS_SUPPORT_HPP

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "phasered/model.hpp"
#include "phasered/trigpoly.hpp"

namespace testing {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Reference parameters: omega = 1, m = -1, alpha = pi/2 + 1/20.
inline constexpr double kRefAlpha = kPi / 2.0 + 0.05;

inline std::vector<double> random_phases(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, kTwoPi);
    std::vector<double> phi(n);
    for (auto& v : phi) v = u(rng);
    return phi;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Random weighted digraph; each entry present with probability `density`.
inline phasered::Network random_digraph(std::mt19937_64& rng, std::size_t n, double density = 0.6) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            if (uniform(rng, 0.0, 1.0) < density) a(i, j) = uniform(rng, 0.2, 1.5);
        }
    }
    return phasered::Network(a);
}

/// Random polynomial with `terms` modes, |frequencies| <= max_freq, over n oscillators.
inline phasered::TrigPoly random_poly(std::mt19937_64& rng, std::size_t n, int terms, int max_freq) {
    using namespace phasered;
    TrigPoly p(n);
    std::uniform_int_distribution<int> f(-max_freq, max_freq);
    for (int t = 0; t < terms; ++t) {
        std::vector<FreqVector::Entry> e;
        for (std::size_t j = 0; j < n; ++j) {
            if (const int v = f(rng); v != 0) e.emplace_back(static_cast<std::uint32_t>(j), v);
        }
        p += TrigPoly::exp_pair(n, FreqVector(e), Complex(uniform(rng, -1, 1), uniform(rng, -1, 1)));
    }
    return p;
}

inline phasered::Network path_graph(std::size_t n) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i + 1 < a.rows(); ++i) a(i, i + 1) = a(i + 1, i) = 1.0;
    return phasered::Network(a);
}

inline phasered::Network star_graph(std::size_t n) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 1; i < a.rows(); ++i) a(0, i) = a(i, 0) = 1.0;
    return phasered::Network(a);
}

/// Cycle 0-1-...-(n-1)-0 plus the chord 0-2.
inline phasered::Network cycle_with_chord(std::size_t n) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const Eigen::Index j = (i + 1) % a.rows();
        a(i, j) = a(j, i) = 1.0;
    }
    a(0, 2) = a(2, 0) = 1.0;
    return phasered::Network(a);
}

} // namespace testing

#endif
