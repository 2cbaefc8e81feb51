#ifndef PHASERED_CONFIG_HPP
#define PHASERED_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "phasered/model.hpp"
#include "phasered/reduction.hpp"

namespace phasered {

/// Evenly spaced values min..max with `steps` points (steps = 1 gives {min}).
struct GridAxis {
    double min = 0.0;
    double max = 0.0;
    int steps = 1;

    std::vector<double> values() const;
};

/// Either the full network system or an (a,b)-reduction.
struct SystemSpec {
    bool full = true;
    ReductionOrder order{};

    static SystemSpec full_system() { return {true, {}}; }
    static SystemSpec reduced(ReductionOrder o) { return {false, o}; }
    /// "full" or an order such as "(2,2)" / "1,inf".
    static SystemSpec parse(const std::string& text);
    std::string label() const;
    bool operator==(const SystemSpec&) const = default;
};

struct ExperimentConfig {
    Params params;
    ShapeFn g;
    Network network;
    GridAxis delta_grid{0.0, 0.3, 61};
    GridAxis K_grid{-0.3, 0.3, 61};
    std::vector<SystemSpec> systems;  ///< empty: per-command default
    double tol = 1e-10;
    std::string output;

    // simulate
    double t_end = 50.0;
    double dt_out = 0.1;
    std::vector<double> initial_R;
    std::vector<double> initial_phi;

    // reduce
    ReductionOrder reduce_order{2, 2};

    // convergence
    std::vector<double> convergence_K{0.02, 0.04, 0.08};
    std::vector<double> convergence_delta{0.0, 0.1};
    int convergence_points = 6;
    std::uint64_t seed = 1;

    /// Defaults: omega = 1, m = -1, alpha = pi/2 + 1/20, g = sin, N = 3 all-to-all.
    static ExperimentConfig defaults();
    /// Missing keys keep their defaults; throws ConfigError on invalid content.
    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig from_file(const std::string& path);

    void validate() const;
};

} // namespace phasered

#endif
