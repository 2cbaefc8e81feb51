#include "phasered/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "phasered/errors.hpp"

namespace phasered {

std::vector<double> GridAxis::values() const {
    std::vector<double> v;
    if (steps == 1) return {min};
    for (int i = 0; i < steps; ++i) v.push_back(min + (max - min) * i / (steps - 1));
    return v;
}

SystemSpec SystemSpec::parse(const std::string& text) {
    if (text == "full") return full_system();
    return reduced(ReductionOrder::parse(text));
}

std::string SystemSpec::label() const { return full ? "full" : order.label(); }

ExperimentConfig ExperimentConfig::defaults() {
    ExperimentConfig c;
    c.params.omega = 1.0;
    c.params.m = -1.0;
    c.params.alpha = std::numbers::pi / 2.0 + 0.05;
    c.g = ShapeFn::sine();
    c.network = Network::all_to_all(3);
    return c;
}

namespace {

GridAxis parse_axis(const nlohmann::json& j, const char* name) {
    if (!j.is_array() || j.size() != 3) throw ConfigError(std::string("grid.") + name + " must be [min, max, steps]");
    GridAxis a{j[0].get<double>(), j[1].get<double>(), j[2].get<int>()};
    if (!std::isfinite(a.min) || !std::isfinite(a.max)) throw ConfigError(std::string("grid.") + name + " bounds must be finite");
    if (a.steps < 1) throw ConfigError(std::string("grid.") + name + " needs steps >= 1");
    return a;
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

} // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
    ExperimentConfig c = defaults();
    try {
        read(j, "omega", c.params.omega);
        read(j, "m", c.params.m);
        read(j, "alpha", c.params.alpha);
        read(j, "K", c.params.K);
        read(j, "delta", c.params.delta);

        if (j.contains("g")) {
            std::vector<ShapeFn::Harmonic> hs;
            for (const auto& h : j.at("g")) {
                hs.push_back({h.at("n").get<int>(), h.value("a", 0.0), h.value("b", 0.0)});
            }
            c.g = ShapeFn(std::move(hs));
        }

        std::size_t n = c.network.size();
        const bool has_n = j.contains("N");
        if (has_n) {
            const long v = j.at("N").get<long>();
            if (v < 1) throw ConfigError("N must be >= 1");
            n = static_cast<std::size_t>(v);
        }
        if (j.contains("adjacency")) {
            const auto& a = j.at("adjacency");
            if (a.is_string()) {
                if (a.get<std::string>() != "all_to_all") throw ConfigError("adjacency must be \"all_to_all\" or a matrix");
                c.network = Network::all_to_all(n);
            } else {
                const std::size_t rows = a.size();
                if (rows == 0) throw ConfigError("adjacency matrix is empty");
                Eigen::MatrixXd m(rows, rows);
                for (std::size_t r = 0; r < rows; ++r) {
                    if (a.at(r).size() != rows) throw ConfigError("adjacency matrix must be square");
                    for (std::size_t col = 0; col < rows; ++col) {
                        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col)) = a.at(r).at(col).get<double>();
                    }
                }
                if (has_n && rows != n) throw ConfigError("N disagrees with the adjacency matrix size");
                c.network = Network(std::move(m));
            }
        } else {
            c.network = Network::all_to_all(n);
        }

        if (j.contains("grid")) {
            const auto& g = j.at("grid");
            if (g.contains("delta")) c.delta_grid = parse_axis(g.at("delta"), "delta");
            if (g.contains("K")) c.K_grid = parse_axis(g.at("K"), "K");
        }
        if (j.contains("systems")) {
            c.systems.clear();
            for (const auto& s : j.at("systems")) c.systems.push_back(SystemSpec::parse(s.get<std::string>()));
        }
        read(j, "tol", c.tol);
        read(j, "output", c.output);
        read(j, "t_end", c.t_end);
        read(j, "dt_out", c.dt_out);
        read(j, "initial_R", c.initial_R);
        read(j, "initial_phi", c.initial_phi);
        if (j.contains("order")) c.reduce_order = ReductionOrder::parse(j.at("order").get<std::string>());
        if (j.contains("convergence")) {
            const auto& cv = j.at("convergence");
            read(cv, "K", c.convergence_K);
            read(cv, "delta", c.convergence_delta);
            read(cv, "points", c.convergence_points);
        }
        read(j, "seed", c.seed);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid configuration: ") + e.what());
    }
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open configuration file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse " + path + ": " + e.what());
    }
    return from_json(j);
}

void ExperimentConfig::validate() const {
    params.validate();
    if (!(tol > 0.0) || tol >= 1e-2) throw ConfigError("tol must lie in (0, 1e-2)");
    if (!(t_end >= 0.0) || !(dt_out > 0.0)) throw ConfigError("t_end must be >= 0 and dt_out > 0");
    const std::size_t n = network.size();
    if (!initial_R.empty() && initial_R.size() != n) throw ConfigError("initial_R length must equal N");
    if (!initial_phi.empty() && initial_phi.size() != n) throw ConfigError("initial_phi length must equal N");
    for (double r : initial_R) {
        if (!(r > 0.0)) throw ConfigError("initial radii must be positive");
    }
    if (convergence_points < 1) throw ConfigError("convergence.points must be >= 1");
    for (double k : convergence_K) {
        if (!(k != 0.0) || !std::isfinite(k)) throw ConfigError("convergence K values must be finite and nonzero");
    }
    for (double d : convergence_delta) {
        if (!(std::abs(d) < 1.0)) throw ConfigError("convergence delta values must satisfy |delta| < 1");
    }
    for (const auto& axis : {delta_grid, K_grid}) {
        if (axis.steps < 1 || !std::isfinite(axis.min) || !std::isfinite(axis.max)) throw ConfigError("invalid grid axis");
    }
    for (double d : delta_grid.values()) {
        if (!(std::abs(d) < 1.0)) throw ConfigError("grid delta values must satisfy |delta| < 1");
    }
}

} // namespace phasered
