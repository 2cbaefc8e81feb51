#include "phasered/hypergraph.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "phasered/errors.hpp"

namespace phasered {

double Hyper3Tensor::operator()(std::size_t k, std::size_t l, std::size_t i) const {
    auto it = entries.find({k, l, i});
    return it == entries.end() ? 0.0 : it->second;
}

std::pair<Hyper3Tensor, Hyper3Tensor> build_tensors(const Network& net) {
    const std::size_t n = net.size();
    Hyper3Tensor hat{n, {}}, bar{n, {}};
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = 0; l < n; ++l) {
            const double akl = net(k, l);
            if (akl == 0.0) continue;
            for (std::size_t i = 0; i < n; ++i) {
                if (const double v = akl * net(k, i); v != 0.0) hat.entries[{k, l, i}] = v;
                if (const double v = akl * net(l, i); v != 0.0) bar.entries[{k, l, i}] = v;
            }
        }
    }
    return {std::move(hat), std::move(bar)};
}

VirtualEdgeGraph VirtualEdgeGraph::from(const Network& net) { return {net.adjacency() * net.adjacency()}; }

std::vector<std::pair<std::size_t, std::size_t>> VirtualEdgeGraph::virtual_only(const Network& net) const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t k = 0; k < net.size(); ++k) {
        for (std::size_t i = 0; i < net.size(); ++i) {
            if (c(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) != 0.0 && net(k, i) == 0.0) {
                out.emplace_back(k, i);
            }
        }
    }
    return out;
}

std::vector<double> eval_second_order_via_hypergraph(std::span<const double> phi, const Network& net,
                                                     const Params& p) {
    const std::size_t n = net.size();
    if (phi.size() != n) throw std::invalid_argument("phase vector length differs from network size");
    const auto [hat, bar] = build_tensors(net);
    const double a = p.alpha;
    const double ca2 = 2.0 * std::cos(a);
    const double scale = 1.0 / (2.0 * static_cast<double>(n * n) * p.m);
    std::vector<double> out(n, 0.0);
    for (const auto& [idx, w] : hat.entries) {
        const auto [k, l, i] = idx;
        const double ghat = ca2 * std::sin(phi[l] - phi[k] + a) + std::sin(phi[i] - phi[l]) -
                            std::sin(phi[i] - 2.0 * phi[k] + phi[l] + 2.0 * a);
        out[k] -= scale * w * ghat;
    }
    for (const auto& [idx, w] : bar.entries) {
        const auto [k, l, i] = idx;
        const double gbar = ca2 * std::sin(phi[l] - phi[k] + a) - std::sin(phi[i] - phi[k] + 2.0 * a) +
                            std::sin(phi[i] + phi[k] - 2.0 * phi[l]);
        out[k] += scale * w * gbar;
    }
    return out;
}

std::string to_string(Coupling c) {
    switch (c) {
    case Coupling::PairShift: return "sin(phi_l-phi_k+alpha)";
    case Coupling::HeadDiff: return "sin(phi_i-phi_l)";
    case Coupling::TripleShift: return "sin(phi_i-2phi_k+phi_l+2alpha)";
    case Coupling::VirtualShift: return "sin(phi_i-phi_k+2alpha)";
    case Coupling::TripleBar: return "sin(phi_i+phi_k-2phi_l)";
    }
    return {};
}

std::string to_string(Structure s) {
    switch (s) {
    case Structure::Graph: return "graph";
    case Structure::VirtualGraph: return "virtual-graph";
    case Structure::HatTensor: return "hhat";
    case Structure::BarTensor: return "hbar";
    }
    return {};
}

Coupling coupling_from_string(const std::string& s) {
    for (auto c : {Coupling::PairShift, Coupling::HeadDiff, Coupling::TripleShift, Coupling::VirtualShift,
                   Coupling::TripleBar}) {
        if (to_string(c) == s) return c;
    }
    throw ConfigError("unknown coupling template: " + s);
}

Structure structure_from_string(const std::string& s) {
    for (auto x : {Structure::Graph, Structure::VirtualGraph, Structure::HatTensor, Structure::BarTensor}) {
        if (to_string(x) == s) return x;
    }
    throw ConfigError("unknown interaction structure: " + s);
}

namespace {

double coupling_value(Coupling c, double pk, double pl, double pi, double alpha) {
    switch (c) {
    case Coupling::PairShift: return std::sin(pl - pk + alpha);
    case Coupling::HeadDiff: return std::sin(pi - pl);
    case Coupling::TripleShift: return std::sin(pi - 2.0 * pk + pl + 2.0 * alpha);
    case Coupling::VirtualShift: return std::sin(pi - pk + 2.0 * alpha);
    case Coupling::TripleBar: return std::sin(pi + pk - 2.0 * pl);
    }
    return 0.0;
}

const char* term_key(Structure s) {
    switch (s) {
    case Structure::Graph: return "edges";
    case Structure::VirtualGraph: return "virtual_edges";
    default: return "triples";
    }
}

} // namespace

std::vector<double> InteractionClass::eval(std::span<const double> phi, double alpha, std::size_t n) const {
    std::vector<double> out(n, 0.0);
    for (const auto& t : pairs) {
        // Pair couplings only involve (k, head); the head plays the role of l or i.
        out[t.k] += prefactor * t.weight * coupling_value(coupling, phi[t.k], phi[t.l], phi[t.l], alpha);
    }
    for (const auto& t : triples) {
        out[t.k] += prefactor * t.weight * coupling_value(coupling, phi[t.k], phi[t.l], phi[t.i], alpha);
    }
    return out;
}

std::vector<double> InteractionDecomposition::eval_class(const std::string& label, std::span<const double> phi) const {
    return classes.at(label).eval(phi, alpha, n);
}

std::vector<double> InteractionDecomposition::eval(std::span<const double> phi) const {
    if (phi.size() != n) throw std::invalid_argument("phase vector length differs from network size");
    std::vector<double> out(n, 0.0);
    for (const char* label : {"a", "b1", "b2", "c1", "c2"}) {
        const auto v = eval_class(label, phi);
        for (std::size_t k = 0; k < n; ++k) out[k] += v[k];
    }
    return out;
}

InteractionDecomposition decompose(const Network& net, const Params& p) {
    const std::size_t n = net.size();
    InteractionDecomposition d;
    d.n = n;
    d.alpha = p.alpha;
    d.m = p.m;
    const double nn = static_cast<double>(n * n);
    const double base = 1.0 / (2.0 * nn * p.m);
    const double ca = std::cos(p.alpha);

    InteractionClass a1{Structure::Graph, Coupling::PairShift, -ca / (nn * p.m), {}, {}};
    InteractionClass a2{Structure::Graph, Coupling::PairShift, ca / (nn * p.m), {}, {}};
    InteractionClass a{Structure::Graph, Coupling::PairShift, -ca / (nn * p.m), {}, {}};
    InteractionClass b1{Structure::HatTensor, Coupling::HeadDiff, -base, {}, {}};
    InteractionClass c1{Structure::HatTensor, Coupling::TripleShift, base, {}, {}};
    InteractionClass b2{Structure::VirtualGraph, Coupling::VirtualShift, -base, {}, {}};
    InteractionClass c2{Structure::BarTensor, Coupling::TripleBar, base, {}, {}};

    std::vector<double> deg(n);
    for (std::size_t k = 0; k < n; ++k) deg[k] = net.degree(k);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = 0; l < n; ++l) {
            const double akl = net(k, l);
            if (akl == 0.0) continue;
            if (deg[k] != 0.0) a1.pairs.push_back({k, l, akl * deg[k]});
            if (deg[l] != 0.0) a2.pairs.push_back({k, l, akl * deg[l]});
            if (deg[k] != deg[l]) a.pairs.push_back({k, l, akl * (deg[k] - deg[l])});
        }
    }

    const auto [hat, bar] = build_tensors(net);
    for (const auto& [idx, w] : hat.entries) {
        b1.triples.push_back({idx[0], idx[1], idx[2], w});
        c1.triples.push_back({idx[0], idx[1], idx[2], w});
    }
    for (const auto& [idx, w] : bar.entries) c2.triples.push_back({idx[0], idx[1], idx[2], w});

    const auto virt = VirtualEdgeGraph::from(net);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            const double c = virt.c(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i));
            if (c != 0.0) b2.pairs.push_back({k, i, c});
        }
    }

    d.classes = {{"a", a}, {"a1", a1}, {"a2", a2}, {"b1", b1}, {"b2", b2}, {"c1", c1}, {"c2", c2}};
    return d;
}

nlohmann::json InteractionDecomposition::to_json() const {
    nlohmann::json cls = nlohmann::json::object();
    for (const auto& [label, c] : classes) {
        nlohmann::json terms = nlohmann::json::array();
        for (const auto& t : c.pairs) terms.push_back({t.k, t.l, t.weight});
        for (const auto& t : c.triples) terms.push_back({t.k, t.l, t.i, t.weight});
        cls[label] = {{"structure", to_string(c.structure)},
                      {"coupling", to_string(c.coupling)},
                      {"prefactor", c.prefactor},
                      {term_key(c.structure), terms}};
    }
    return {{"n", n}, {"params", {{"alpha", alpha}, {"m", m}}}, {"classes", cls}};
}

InteractionDecomposition InteractionDecomposition::from_json(const nlohmann::json& j) {
    try {
        InteractionDecomposition d;
        d.n = j.at("n").get<std::size_t>();
        d.alpha = j.at("params").at("alpha").get<double>();
        d.m = j.at("params").at("m").get<double>();
        for (const auto& [label, c] : j.at("classes").items()) {
            InteractionClass ic;
            ic.structure = structure_from_string(c.at("structure").get<std::string>());
            ic.coupling = coupling_from_string(c.at("coupling").get<std::string>());
            ic.prefactor = c.at("prefactor").get<double>();
            const std::string key = term_key(ic.structure);
            if (!c.contains(key)) throw ConfigError("class " + label + " lacks its \"" + key + "\" list");
            if (key != "triples") {
                for (const auto& t : c.at(key)) {
                    ic.pairs.push_back({t.at(0).get<std::size_t>(), t.at(1).get<std::size_t>(), t.at(2).get<double>()});
                }
            } else {
                for (const auto& t : c.at(key)) {
                    ic.triples.push_back({t.at(0).get<std::size_t>(), t.at(1).get<std::size_t>(),
                                          t.at(2).get<std::size_t>(), t.at(3).get<double>()});
                }
            }
            d.classes.emplace(label, std::move(ic));
        }
        return d;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed decomposition JSON: ") + e.what());
    }
}

void export_json(const InteractionDecomposition& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << d.to_json().dump(2) << '\n';
    if (!out) throw std::runtime_error("failed writing " + path);
}

InteractionDecomposition import_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid JSON in ") + path + ": " + e.what());
    }
    return InteractionDecomposition::from_json(j);
}

bool hypergraph_is_directed(const Hyper3Tensor& hhat) {
    for (std::size_t k = 0; k < hhat.n; ++k) {
        for (std::size_t l = 0; l < hhat.n; ++l) {
            for (std::size_t i = 0; i < hhat.n; ++i) {
                if (hhat(k, l, i) != hhat(l, k, i)) return true;
            }
        }
    }
    return false;
}

} // namespace phasered
