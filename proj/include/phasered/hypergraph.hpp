#ifndef PHASERED_HYPERGRAPH_HPP
#define PHASERED_HYPERGRAPH_HPP

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "phasered/model.hpp"

namespace phasered {

/// Sparse directed 3-tensor; (k, l, i) is a hyperedge with tail k and heads l, i.
struct Hyper3Tensor {
    using Index = std::array<std::size_t, 3>;

    std::size_t n = 0;
    std::map<Index, double> entries;

    double operator()(std::size_t k, std::size_t l, std::size_t i) const;
    std::size_t nnz() const { return entries.size(); }
};

/// hhat_kli = a_kl a_ki and hbar_kli = a_kl a_li.
std::pair<Hyper3Tensor, Hyper3Tensor> build_tensors(const Network& net);

/// c_ki = sum_l a_kl a_li, the weighted number of length-2 paths k -> l -> i.
struct VirtualEdgeGraph {
    Eigen::MatrixXd c;

    static VirtualEdgeGraph from(const Network& net);
    /// Pairs with c_ki != 0 that are not edges of the network.
    std::vector<std::pair<std::size_t, std::size_t>> virtual_only(const Network& net) const;
};

/// P^(2,0) of the graph-coupled system, written with hhat, hbar and the hyperedge coupling functions.
std::vector<double> eval_second_order_via_hypergraph(std::span<const double> phi, const Network& net, const Params& p);

/// Trigonometric templates that appear as coupling functions in the second-order terms.
enum class Coupling {
    PairShift,     ///< sin(phi_l - phi_k + alpha)
    HeadDiff,      ///< sin(phi_i - phi_l)
    TripleShift,   ///< sin(phi_i - 2 phi_k + phi_l + 2 alpha)
    VirtualShift,  ///< sin(phi_i - phi_k + 2 alpha)
    TripleBar,     ///< sin(phi_i + phi_k - 2 phi_l)
};

enum class Structure { Graph, VirtualGraph, HatTensor, BarTensor };

std::string to_string(Coupling c);
std::string to_string(Structure s);
Coupling coupling_from_string(const std::string& s);
Structure structure_from_string(const std::string& s);

struct PairTerm {
    std::size_t k;
    std::size_t l;  ///< the head node; named i for virtual edges
    double weight;
    bool operator==(const PairTerm&) const = default;
};

struct TripleTerm {
    std::size_t k;
    std::size_t l;
    std::size_t i;
    double weight;
    bool operator==(const TripleTerm&) const = default;
};

/// prefactor * sum over terms of weight * coupling(phases of the term).
struct InteractionClass {
    Structure structure = Structure::Graph;
    Coupling coupling = Coupling::PairShift;
    double prefactor = 0.0;
    std::vector<PairTerm> pairs;
    std::vector<TripleTerm> triples;

    bool empty() const { return pairs.empty() && triples.empty(); }
    /// Contribution to every oscillator.
    std::vector<double> eval(std::span<const double> phi, double alpha, std::size_t n) const;
    bool operator==(const InteractionClass&) const = default;
};

/// Split of P^(2,0) into the classes a1, a2 (merged into a), b1, b2, c1, c2.
struct InteractionDecomposition {
    std::size_t n = 0;
    double alpha = 0.0;
    double m = -1.0;
    std::map<std::string, InteractionClass> classes;

    /// a + b1 + b2 + c1 + c2 (a1 and a2 are the unmerged halves of a).
    std::vector<double> eval(std::span<const double> phi) const;
    std::vector<double> eval_class(const std::string& label, std::span<const double> phi) const;

    nlohmann::json to_json() const;
    static InteractionDecomposition from_json(const nlohmann::json& j);
    bool operator==(const InteractionDecomposition&) const = default;
};

InteractionDecomposition decompose(const Network& net, const Params& p);

/// Throws std::runtime_error on I/O failure.
void export_json(const InteractionDecomposition& d, const std::string& path);
InteractionDecomposition import_json(const std::string& path);

/// True if some (k, l, i) has hhat_kli != hhat_lki.
bool hypergraph_is_directed(const Hyper3Tensor& hhat);

} // namespace phasered

#endif
