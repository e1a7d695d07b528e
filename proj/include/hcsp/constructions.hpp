#pragma once

// Explicit witness constructions: the hard crisp language built from
// co-diagonal relations on disjoint color copies, its disequality gadget and
// coloring-based satisfying assignment, ordered high-chromatic structures,
// the max-weight-independent-set language with its structures, and simple
// graph-class tests.

#include "hcsp/coloring.hpp"
#include "hcsp/vcsp.hpp"

#include <algorithm>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace hcsp {

// ---------------------------------------------------------------------------
// Hard language

struct HardLanguage {
    std::vector<std::size_t> arities;
    std::size_t colors = 0;
    std::shared_ptr<const ValuedLanguage> language;

    [[nodiscard]] std::size_t copies() const { return arities.size(); }
    /// Element of copy D_i holding color j (both 0-based).
    [[nodiscard]] Value copy(std::size_t i, std::size_t j) const { return static_cast<Value>(i * colors + j); }
    [[nodiscard]] std::size_t copy_index(Value a) const { return a / colors; }
};

/// rho_i = D^{n_i} minus the constant tuples over copy D_i, on D = D_1 ∪ ... ∪ D_k.
inline HardLanguage build_hard_language(const std::vector<std::size_t>& arities, std::size_t m)
{
    if (m <= 2)
        throw std::invalid_argument("build_hard_language: need m > 2");
    if (arities.empty())
        throw std::invalid_argument("build_hard_language: empty signature");
    for (auto a : arities)
        if (a == 0)
            throw std::invalid_argument("build_hard_language: arity 0");
    if (is_all_unary(Signature{arities}))
        throw std::invalid_argument("build_hard_language: all-unary signature");
    const std::size_t k = arities.size();
    const std::size_t d = k * m;
    auto lang = std::make_shared<ValuedLanguage>();
    lang->domain_size = d;
    HardLanguage out{arities, m, nullptr};
    for (std::size_t i = 0; i < k; ++i) {
        std::vector<std::pair<std::uint64_t, CostValue>> forbidden;
        for (std::size_t j = 0; j < m; ++j) {
            std::vector<Value> diag(arities[i], out.copy(i, j));
            forbidden.emplace_back(encode_tuple(diag, d), CostValue::infinity());
        }
        lang->functions.push_back(CostFunction::sparse(d, arities[i], CostValue(0), forbidden));
        lang->names.push_back("rho" + std::to_string(i + 1));
    }
    out.language = std::move(lang);
    return out;
}

namespace detail {

    inline void check_hard(const HardLanguage& h)
    {
        if (!h.language)
            throw std::invalid_argument("hard language missing");
        auto rebuilt = build_hard_language(h.arities, h.colors);
        if (rebuilt.language->functions.size() != h.language->functions.size()
            || rebuilt.language->domain_size != h.language->domain_size)
            throw std::invalid_argument("malformed hard language");
        for (std::size_t i = 0; i < h.language->functions.size(); ++i)
            if (!(rebuilt.language->functions[i] == h.language->functions[i]))
                throw std::invalid_argument("malformed hard language: relation " + std::to_string(i));
    }

}  // namespace detail

/// Instance on variables x=0, y=1 whose objective is the disequality gadget:
/// unary relations applied to x and to y, every other relation applied to (x,y,...,y).
inline Instance neq_gadget_instance(const HardLanguage& h)
{
    Instance inst{h.language, 2, {}};
    for (std::size_t i = 0; i < h.arities.size(); ++i) {
        if (h.arities[i] == 1) {
            inst.constraints.push_back({i, {0}, Rational(1)});
            inst.constraints.push_back({i, {1}, Rational(1)});
        } else {
            std::vector<std::size_t> scope(h.arities[i], 1);
            scope[0] = 0;
            inst.constraints.push_back({i, scope, Rational(1)});
        }
    }
    return inst;
}

/// The gadget conjunction tabulated directly from the relations.
inline CostFunction neq_gadget(const HardLanguage& h)
{
    detail::check_hard(h);
    const auto& lang = *h.language;
    return CostFunction::tabulate(lang.domain_size, 2, [&](std::span<const Value> xy) {
        const Value x = xy[0], y = xy[1];
        for (std::size_t i = 0; i < h.arities.size(); ++i) {
            const auto& rho = lang.functions[i];
            if (h.arities[i] == 1) {
                if (rho({x}).is_infinite() || rho({y}).is_infinite())
                    return CostValue::infinity();
            } else {
                std::vector<Value> t(h.arities[i], y);
                t[0] = x;
                if (rho(t).is_infinite())
                    return CostValue::infinity();
            }
        }
        return CostValue(0);
    });
}

/// D' = union of the copies belonging to non-unary relations.
inline std::vector<Value> gadget_support(const HardLanguage& h)
{
    std::vector<Value> out;
    for (std::size_t i = 0; i < h.arities.size(); ++i)
        if (h.arities[i] >= 2)
            for (std::size_t j = 0; j < h.colors; ++j)
                out.push_back(h.copy(i, j));
    return out;
}

struct ColorWitness {
    Coloring coloring;
    /// selector[j] = least relation index without a j-monochromatic tuple, for used colors.
    std::vector<std::optional<std::size_t>> selector;
    Assignment assignment;
    CostValue value;
};

struct NoProperColoring {};

/// Satisfying assignment of the structure's instance over the hard language,
/// read off a proper coloring with at most m colors.
inline std::variant<ColorWitness, NoProperColoring> coloring_feasibility_witness(
    const RelationalStructure& r, const HardLanguage& h)
{
    detail::check_hard(h);
    if (!(r.signature() == Signature{h.arities}))
        throw std::invalid_argument("coloring_feasibility_witness: signature mismatch");
    auto c = find_proper_coloring(r, h.colors);
    if (!c)
        return NoProperColoring{};
    ColorWitness w;
    w.coloring = *c;
    w.selector.assign(h.colors, std::nullopt);
    w.assignment.assign(r.universe_size(), 0);
    for (std::size_t j = 0; j < h.colors; ++j) {
        bool used = std::find(c->colors.begin(), c->colors.end(), j) != c->colors.end();
        if (!used)
            continue;
        for (std::size_t i = 0; i < r.num_relations(); ++i)
            if (!has_monochromatic_tuple(r, i, c->colors, j)) {
                w.selector[j] = i;
                break;
            }
        if (!w.selector[j])
            throw std::logic_error("proper coloring without a selector relation");
    }
    for (Element v = 0; v < r.universe_size(); ++v)
        w.assignment[v] = h.copy(*w.selector[c->colors[v]], c->colors[v]);
    w.value = evaluate(instance_from_structure(r, h.language), w.assignment);
    return w;
}

// ---------------------------------------------------------------------------
// Ordered structures

/// Universe [n(m-1)+1] with m the largest arity; every slot holds all
/// strictly increasing tuples of its arity.
inline RelationalStructure ordered_witness(std::size_t n, const std::vector<std::size_t>& arities)
{
    if (n == 0 || arities.empty())
        throw std::invalid_argument("ordered_witness: need n >= 1 and a nonempty signature");
    const std::size_t m = *std::max_element(arities.begin(), arities.end());
    if (m == 0)
        throw std::invalid_argument("ordered_witness: arity 0");
    const std::size_t size = n * (m - 1) + 1;
    std::vector<std::vector<Tuple>> rels;
    for (auto a : arities) {
        std::vector<Tuple> r;
        Tuple t(a);
        // Lexicographic enumeration of a-subsets of [size].
        for (std::size_t j = 0; j < a; ++j)
            t[j] = static_cast<Element>(j);
        if (a <= size)
            while (true) {
                r.push_back(t);
                std::size_t j = a;
                while (j > 0 && t[j - 1] == size - a + (j - 1))
                    --j;
                if (j == 0)
                    break;
                ++t[j - 1];
                for (std::size_t q = j; q < a; ++q)
                    t[q] = t[q - 1] + 1;
            }
        rels.push_back(std::move(r));
    }
    return RelationalStructure(size, Signature{arities}, std::move(rels));
}

/// Single relation of arity m.
inline RelationalStructure ordered_witness(std::size_t n, std::size_t m)
{
    if (m < 2)
        throw std::invalid_argument("ordered_witness: need m >= 2");
    return ordered_witness(n, std::vector<std::size_t>{m});
}

// ---------------------------------------------------------------------------
// Max weight independent set language and structures

/// D = {0,1}; f(1,1) = ∞ and 0 elsewhere, then the four {0,1}-valued unaries
/// in mask order (mask bit a is the value at a).
inline std::shared_ptr<const ValuedLanguage> mwis_language()
{
    auto lang = std::make_shared<ValuedLanguage>();
    lang->domain_size = 2;
    lang->functions.push_back(CostFunction::dense(2, 2, {0, 0, 0, CostValue::infinity()}));
    lang->names.push_back("f");
    for (std::uint64_t mask = 0; mask < 4; ++mask) {
        lang->functions.push_back(unary_indicator(2, mask));
        lang->names.push_back("u" + std::to_string(mask));
    }
    return lang;
}

struct Digraph {
    std::size_t n = 0;
    std::vector<std::pair<Element, Element>> arcs;
};

struct Graph {
    std::size_t n = 0;
    /// Undirected edges stored once with first < second, sorted.
    std::vector<std::pair<Element, Element>> edges;

    static Graph make(std::size_t n, std::vector<std::pair<Element, Element>> edges)
    {
        for (auto& [u, v] : edges) {
            if (u >= n || v >= n)
                throw std::invalid_argument("graph edge outside vertex set");
            if (u == v)
                throw std::invalid_argument("graph self-loop");
            if (u > v)
                std::swap(u, v);
        }
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        return Graph{n, std::move(edges)};
    }

    [[nodiscard]] std::vector<std::vector<Element>> adjacency() const
    {
        std::vector<std::vector<Element>> adj(n);
        for (auto [u, v] : edges) {
            adj[u].push_back(v);
            adj[v].push_back(u);
        }
        return adj;
    }

    /// Orientation u -> v for every stored edge (u < v).
    [[nodiscard]] Digraph forward_orientation() const { return Digraph{n, edges}; }

    /// The graph as one symmetric binary relation.
    [[nodiscard]] RelationalStructure symmetric_structure() const
    {
        std::vector<Tuple> r;
        for (auto [u, v] : edges) {
            r.push_back({u, v});
            r.push_back({v, u});
        }
        return RelationalStructure(n, Signature{{2}}, {r});
    }
};

inline Graph complete_graph(std::size_t n)
{
    std::vector<std::pair<Element, Element>> e;
    for (Element u = 0; u < n; ++u)
        for (Element v = u + 1; v < n; ++v)
            e.emplace_back(u, v);
    return Graph::make(n, e);
}

inline Graph cycle_graph(std::size_t n)
{
    std::vector<std::pair<Element, Element>> e;
    for (Element u = 0; u < n; ++u)
        e.emplace_back(u, static_cast<Element>((u + 1) % n));
    return Graph::make(n, e);
}

/// (V, oriented G, V_1, ..., V_k).
inline RelationalStructure hg_structure(const Digraph& g, const std::vector<std::vector<Element>>& unary_sets)
{
    Signature sig{{2}};
    std::vector<std::vector<Tuple>> rels(1);
    for (auto [u, v] : g.arcs) {
        if (u >= g.n || v >= g.n || u == v)
            throw std::invalid_argument("hg_structure: arcs must be loop-free within the vertex set");
        rels[0].push_back({u, v});
    }
    for (const auto& s : unary_sets) {
        sig.arities.push_back(1);
        std::vector<Tuple> r;
        for (auto v : s) {
            if (v >= g.n)
                throw std::invalid_argument("hg_structure: unary set outside vertex set");
            r.push_back({v});
        }
        rels.push_back(std::move(r));
    }
    return RelationalStructure(g.n, std::move(sig), std::move(rels));
}

// ---------------------------------------------------------------------------
// Graph-class tests

inline bool is_dag(const Digraph& g)
{
    std::vector<Tuple> arcs;
    for (auto [u, v] : g.arcs)
        arcs.push_back({u, v});
    RelationalStructure s(g.n, Signature{{2}}, {arcs});
    return find_ordering(s).has_value();
}

/// Homomorphism into K_k.
inline bool k_colorable(const Graph& g, std::size_t k)
{
    if (g.n == 0)
        return true;
    if (k == 0)
        return false;
    return find_homomorphism(g.symmetric_structure(), complete_graph(k).symmetric_structure()).has_value();
}

/// Length of a shortest odd cycle, nullopt when the graph is bipartite.
inline std::optional<std::size_t> odd_girth(const Graph& g)
{
    auto adj = g.adjacency();
    std::optional<std::size_t> best;
    constexpr auto kUnseen = std::numeric_limits<std::size_t>::max();
    for (Element s = 0; s < g.n; ++s) {
        std::vector<std::size_t> dist(g.n, kUnseen);
        std::queue<Element> q;
        dist[s] = 0;
        q.push(s);
        while (!q.empty()) {
            auto u = q.front();
            q.pop();
            for (auto w : adj[u]) {
                if (dist[w] == kUnseen) {
                    dist[w] = dist[u] + 1;
                    q.push(w);
                } else if (dist[w] == dist[u]) {
                    // Closed odd walk through s of length 2*dist+1; the minimum
                    // over all s is attained by a shortest odd cycle.
                    auto len = 2 * dist[u] + 1;
                    if (!best || len < *best)
                        best = len;
                }
            }
        }
    }
    return best;
}

struct GraphClassReport {
    bool dag = false;
    std::vector<std::pair<std::size_t, bool>> colorable;
    std::optional<std::size_t> odd_girth;
    bool triangle_free = false;
};

/// DAG test of an orientation, k-colorability for each k in ks, and odd girth.
inline GraphClassReport graph_class_tests(const Graph& g, const Digraph& orientation, const std::vector<std::size_t>& ks)
{
    GraphClassReport rep;
    rep.dag = is_dag(orientation);
    for (auto k : ks)
        rep.colorable.emplace_back(k, k_colorable(g, k));
    rep.odd_girth = odd_girth(g);
    rep.triangle_free = !rep.odd_girth || *rep.odd_girth >= 4;
    return rep;
}

}  // namespace hcsp
