// Command-line front end: simulations, reductions, Floquet analysis and parameter sweeps.

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include <omp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "phasered/config.hpp"
#include "phasered/errors.hpp"
#include "phasered/experiments.hpp"
#include "phasered/hypergraph.hpp"
#include "phasered/reduction.hpp"

using namespace phasered;

namespace {

struct CommonOptions {
    std::string config;
    std::string out;
    double tol = 0.0;
    int threads = 0;
    long long seed = -1;
};

ExperimentConfig load(const CommonOptions& o) {
    ExperimentConfig cfg = o.config.empty() ? ExperimentConfig::defaults() : ExperimentConfig::from_file(o.config);
    if (o.tol > 0.0) cfg.tol = o.tol;
    if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
    if (!o.out.empty()) cfg.output = o.out;
    if (o.threads > 0) omp_set_num_threads(o.threads);
    cfg.validate();
    return cfg;
}

/// Writes to cfg.output, or stdout when it is empty.
template <typename Fn>
void emit(const ExperimentConfig& cfg, Fn&& writer) {
    if (cfg.output.empty()) {
        writer(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream f(cfg.output);
    if (!f) throw ConfigError("cannot open output file " + cfg.output);
    writer(f);
    if (!f) throw NumericalError("failed writing " + cfg.output);
}

int report_failures(const std::vector<SweepRow>& rows) {
    int failed = 0;
    for (const auto& r : rows) {
        if (r.converged) continue;
        ++failed;
        std::cerr << "not converged: delta=" << format_double(r.delta) << " K=" << format_double(r.K)
                  << " system=" << r.system << ": " << r.reason << '\n';
    }
    return failed;
}

void add_common(CLI::App* app, CommonOptions& o) {
    app->add_option("--config", o.config, "JSON configuration file");
    app->add_option("--out", o.out, "output path (default: stdout)");
    app->add_option("--tol", o.tol, "integrator tolerance")->check(CLI::PositiveNumber);
    app->add_option("--threads", o.threads, "OpenMP worker threads")->check(CLI::PositiveNumber);
    app->add_option("--seed", o.seed, "seed for random phases")->check(CLI::NonNegativeNumber);
}

int run_hypergraph_check(const ExperimentConfig& cfg, const InteractionDecomposition& d, std::ostream& log) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    const std::size_t n = cfg.network.size();
    const auto P20 = compute_P(cfg.network, cfg.params, cfg.g, 2, 0);
    double dev_classes = 0.0, dev_tensors = 0.0;
    std::vector<double> phi(n);
    for (int s = 0; s < 200; ++s) {
        for (auto& v : phi) v = angle(rng);
        const auto classes = d.eval(phi);
        const auto tensors = eval_second_order_via_hypergraph(phi, cfg.network, cfg.params);
        for (std::size_t k = 0; k < n; ++k) {
            const double ref = P20[k].eval(phi);
            dev_classes = std::max(dev_classes, std::abs(classes[k] - ref));
            dev_tensors = std::max(dev_tensors, std::abs(tensors[k] - ref));
        }
    }
    log << "max deviation from P(2,0): six classes " << format_double(dev_classes) << ", hypergraph tensors "
        << format_double(dev_tensors) << '\n';
    return std::max(dev_classes, dev_tensors) < 1e-10 ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Phase reductions and Floquet analysis of deformed Stuart-Landau oscillator networks"};
    app.require_subcommand(1);
    CommonOptions opts;

    auto* simulate_cmd = app.add_subcommand("simulate", "integrate the full system or a reduction, write CSV");
    std::string system_label = "full";
    simulate_cmd->add_option("--system", system_label, "\"full\" or a reduction order such as \"(2,2)\"");
    add_common(simulate_cmd, opts);

    auto* reduce_cmd = app.add_subcommand("reduce", "write the P terms of a reduction as JSON");
    std::string order_label;
    reduce_cmd->add_option("--order", order_label, "reduction order, e.g. \"(2,2)\" (default from config)");
    add_common(reduce_cmd, opts);

    auto* fsync_cmd = app.add_subcommand("floquet-sync", "critical multiplier of the synchronized orbit");
    add_common(fsync_cmd, opts);
    auto* fsplay_cmd = app.add_subcommand("floquet-splay", "continued splay orbit and its critical multiplier");
    add_common(fsplay_cmd, opts);
    auto* ssync_cmd = app.add_subcommand("sweep-sync", "sync multipliers over the (delta, K) grid");
    add_common(ssync_cmd, opts);
    auto* ssplay_cmd = app.add_subcommand("sweep-splay", "splay periods and multipliers over the (delta, K) grid");
    add_common(ssplay_cmd, opts);
    auto* conv_cmd = app.add_subcommand("convergence", "error of reductions against the full dynamics vs K");
    add_common(conv_cmd, opts);

    auto* hyper_cmd = app.add_subcommand("hypergraph", "decompose second-order interactions of a graph");
    bool check = false;
    hyper_cmd->add_flag("--check", check, "compare the decomposition with P(2,0) at random phases");
    add_common(hyper_cmd, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        ExperimentConfig cfg = load(opts);
        if (*simulate_cmd) {
            const SystemSpec spec = SystemSpec::parse(system_label);
            const auto traj = simulate(cfg, spec);
            emit(cfg, [&](std::ostream& o) { write_trajectory_csv(o, traj, cfg.network.size(), spec.full); });
        } else if (*reduce_cmd) {
            const ReductionOrder order = order_label.empty() ? cfg.reduce_order : ReductionOrder::parse(order_label);
            const auto rs = assemble(cfg.network, cfg.params, cfg.g, order);
            emit(cfg, [&](std::ostream& o) { o << rs.to_json().dump(2) << '\n'; });
        } else if (*fsync_cmd || *fsplay_cmd) {
            const auto rows = *fsync_cmd ? floquet_sync(cfg) : floquet_splay(cfg);
            emit(cfg, [&](std::ostream& o) { write_sweep_csv(o, rows); });
            if (report_failures(rows) > 0) return 3;
        } else if (*ssync_cmd || *ssplay_cmd) {
            const auto rows = *ssync_cmd ? sweep_sync(cfg) : sweep_splay(cfg);
            emit(cfg, [&](std::ostream& o) { write_sweep_csv(o, rows); });
            report_failures(rows);
        } else if (*conv_cmd) {
            const auto rows = run_convergence(cfg);
            emit(cfg, [&](std::ostream& o) { write_convergence_csv(o, rows); });
        } else if (*hyper_cmd) {
            const auto d = decompose(cfg.network, cfg.params);
            emit(cfg, [&](std::ostream& o) { o << d.to_json().dump(2) << '\n'; });
            if (check) return run_hypergraph_check(cfg, d, cfg.output.empty() ? std::cerr : std::cout);
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const DomainError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
