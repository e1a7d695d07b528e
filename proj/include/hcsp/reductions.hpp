#pragma once

// Instance transformations:
//   * lifted-language instances  ->  base-language instances on a structure
//     that maps homomorphically into R, with a checkable certificate;
//   * folding {0,1}-valued unaries on the lifted domain into lifted unaries
//     (unary-complete R, conservative base language);
//   * max weight independent set <-> VCSP over the independent-set language.

#include "hcsp/constructions.hpp"
#include "hcsp/lifting.hpp"
#include "hcsp/vcsp.hpp"

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

namespace hcsp {

// ---------------------------------------------------------------------------
// Unary-only variables

struct Preprocessed {
    /// Instance on the kept variables, renumbered 0..kept.size()-1.
    Instance reduced;
    /// kept[u'] is the original index of reduced variable u'.
    std::vector<std::size_t> kept;
    /// Values chosen for removed variables (nullopt for kept ones).
    std::vector<std::optional<Value>> fixed;
    /// Optimal cost contributed by the removed variables.
    CostValue offset{0};
};

/// Removes variables that occur only in unary constraints (or in none), fixing
/// each to its least minimizing value and recording the cost as an offset.
inline Preprocessed preprocess_unary_only_vars(const Instance& inst)
{
    inst.check();
    const std::size_t n = inst.num_vars;
    std::vector<char> nonunary(n, 0);
    for (const auto& c : inst.constraints)
        if (c.vars.size() >= 2)
            for (auto v : c.vars)
                nonunary[v] = 1;

    Preprocessed out;
    out.fixed.assign(n, std::nullopt);
    std::vector<std::size_t> remap(n, SIZE_MAX);
    for (std::size_t v = 0; v < n; ++v)
        if (nonunary[v]) {
            remap[v] = out.kept.size();
            out.kept.push_back(v);
        }

    const std::size_t d = inst.domain_size();
    std::vector<std::vector<CostValue>> local(n, std::vector<CostValue>(d, CostValue(0)));
    out.reduced = Instance{inst.language, out.kept.size(), {}};
    for (const auto& c : inst.constraints) {
        if (c.vars.size() == 1 && !nonunary[c.vars[0]]) {
            const auto& f = inst.function(c);
            for (Value a = 0; a < d; ++a)
                local[c.vars[0]][a] += c.weight * f({a});
            continue;
        }
        Constraint nc = c;
        for (auto& v : nc.vars)
            v = remap[v];
        out.reduced.constraints.push_back(std::move(nc));
    }
    for (std::size_t v = 0; v < n; ++v) {
        if (nonunary[v])
            continue;
        Value best = 0;
        for (Value a = 1; a < d; ++a)
            if (local[v][a] < local[v][best])
                best = a;
        out.fixed[v] = best;
        out.offset += local[v][best];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Lifted instances

struct CopyConflict {
    std::size_t var = 0;
    Element first_copy = 0;
    Element second_copy = 0;
};

namespace detail {

    inline void check_provenance(const LiftedLanguage& lifted, const Instance& inst)
    {
        if (!lifted.language || !inst.language)
            throw std::invalid_argument("lifted language or instance language missing");
        if (inst.language->size() != lifted.provenance.size()
            || inst.language->domain_size != lifted.domain.size())
            throw std::invalid_argument("instance language does not carry lifted provenance");
    }

    // Calls pin(var, copy) for every copy restriction a constraint imposes.
    template <typename Fn>
    void for_each_pin(const LiftedLanguage& lifted, const Constraint& c, Fn&& pin)
    {
        const auto& p = lifted.provenance.at(c.function);
        switch (p.kind) {
        case Provenance::Kind::Lifted:
            for (std::size_t j = 0; j < c.vars.size(); ++j)
                pin(c.vars[j], p.vertices[j]);
            break;
        case Provenance::Kind::Copy:
            pin(c.vars[0], p.vertices[0]);
            break;
        case Provenance::Kind::Delta:
            break;
        }
    }

    // First copy restriction per variable, plus the first conflict if any.
    inline std::pair<std::vector<std::optional<Element>>, std::optional<CopyConflict>> copy_pins(
        const LiftedLanguage& lifted, const Instance& inst)
    {
        std::vector<std::optional<Element>> pin(inst.num_vars);
        std::optional<CopyConflict> conflict;
        for (const auto& c : inst.constraints)
            for_each_pin(lifted, c, [&](std::size_t u, Element v) {
                if (!pin[u])
                    pin[u] = v;
                else if (*pin[u] != v && !conflict)
                    conflict = CopyConflict{u, *pin[u], v};
            });
        return {pin, conflict};
    }

}  // namespace detail

/// A variable restricted to two different copies by different constraints.
inline std::optional<CopyConflict> detect_trivially_infeasible(const LiftedLanguage& lifted, const Instance& inst)
{
    detail::check_provenance(lifted, inst);
    return detail::copy_pins(lifted, inst).second;
}

struct ReductionCertificate {
    Preprocessed preprocessing;
    /// phi[u] = vertex whose copy hosts reduced variable u.
    VertexMap phi;
    /// Same constraints over the base language.
    Instance reduced;
    /// (U, r~_1, ..., r~_k) induced by the constraint scopes.
    RelationalStructure rtilde;
    HomomorphismCheck hom_check;
};

struct TriviallyInfeasible {
    Preprocessed preprocessing;
    CopyConflict conflict;
};

using ReductionResult = std::variant<ReductionCertificate, TriviallyInfeasible>;

/// Rewrites an instance over the lifted language of (base, r) into an
/// instance over base whose structure maps homomorphically into r. The
/// lifted optimum equals the reduced optimum plus preprocessing.offset.
inline ReductionResult reduce_lifted_instance(const LiftedLanguage& lifted,
    std::shared_ptr<const ValuedLanguage> base, const RelationalStructure& r, const Instance& inst)
{
    detail::check_provenance(lifted, inst);
    if (!(base->signature() == r.signature()))
        throw std::invalid_argument("reduce: base language and structure signatures differ");
    if (lifted.domain != LiftedDomain(base->domain_size, r.universe_size()))
        throw std::invalid_argument("reduce: lifted domain does not match (base, structure)");

    auto pre = preprocess_unary_only_vars(inst);
    const auto& red = pre.reduced;
    auto [pins, conflict] = detail::copy_pins(lifted, red);
    if (conflict)
        return TriviallyInfeasible{std::move(pre), *conflict};

    ReductionCertificate cert;
    cert.phi.resize(red.num_vars);
    for (std::size_t u = 0; u < red.num_vars; ++u) {
        if (!pins[u])
            throw std::invalid_argument("reduce: variable not restricted to any copy");
        cert.phi[u] = *pins[u];
    }

    cert.reduced = Instance{base, red.num_vars, {}};
    std::vector<std::vector<Tuple>> rt(r.num_relations());
    for (const auto& c : red.constraints) {
        const auto& p = lifted.provenance.at(c.function);
        if (p.kind == Provenance::Kind::Delta)
            throw std::invalid_argument("reduce: unary lifted-domain functions must be folded first");
        if (p.kind == Provenance::Kind::Copy)
            continue;
        for (std::size_t j = 0; j < c.vars.size(); ++j)
            if (cert.phi[c.vars[j]] != p.vertices[j])
                throw std::logic_error("reduce: scope disagrees with phi");
        cert.reduced.constraints.push_back({p.relation, c.vars, c.weight});
        rt[p.relation].emplace_back(c.vars.begin(), c.vars.end());
    }
    cert.rtilde = RelationalStructure(red.num_vars, r.signature(), std::move(rt));
    cert.hom_check = is_homomorphism(cert.phi, cert.rtilde, r);
    cert.preprocessing = std::move(pre);
    return cert;
}

/// h(u) = embed(phi(u), h~(u)) on kept variables; removed variables take
/// their preprocessed values.
inline Assignment pull_back_solution(const ReductionCertificate& cert, const LiftedDomain& ld, const Assignment& reduced)
{
    if (reduced.size() != cert.phi.size())
        throw std::invalid_argument("pull_back: assignment size mismatch");
    const auto& pre = cert.preprocessing;
    Assignment h(pre.fixed.size(), 0);
    for (std::size_t v = 0; v < pre.fixed.size(); ++v)
        if (pre.fixed[v])
            h[v] = *pre.fixed[v];
    for (std::size_t u = 0; u < pre.kept.size(); ++u)
        h[pre.kept[u]] = ld.embed(cert.phi[u], reduced[u]);
    return h;
}

// ---------------------------------------------------------------------------
// Folding unaries

/// Replaces every Δ constraint (f, u) of an instance over `extended`
/// (= lifted plus appended Δ members) by the lifted conservative unary that
/// agrees with f on the copy pinning u. The output is over lifted.language.
inline Instance fold_unaries(const LiftedLanguage& lifted, const LiftedLanguage& extended, const ValuedLanguage& base,
    const RelationalStructure& r, const Instance& inst)
{
    detail::check_provenance(extended, inst);
    if (!is_unary_complete(r))
        throw std::invalid_argument("fold_unaries: structure is not unary-complete");
    if (!is_conservative(base))
        throw std::invalid_argument("fold_unaries: base language is not conservative");
    if (extended.provenance.size() < lifted.provenance.size()
        || !std::equal(lifted.provenance.begin(), lifted.provenance.end(), extended.provenance.begin()))
        throw std::invalid_argument("fold_unaries: extended language does not extend the lifted one");

    std::map<std::pair<std::size_t, Element>, std::size_t> lifted_unary;
    for (std::size_t idx = 0; idx < lifted.provenance.size(); ++idx) {
        const auto& p = lifted.provenance[idx];
        if (p.kind == Provenance::Kind::Lifted && p.vertices.size() == 1)
            lifted_unary.emplace(std::make_pair(p.relation, p.vertices[0]), idx);
    }

    auto pins = detail::copy_pins(extended, inst).first;
    const auto& ld = lifted.domain;
    Instance out{lifted.language, inst.num_vars, {}};
    for (const auto& c : inst.constraints) {
        const auto& p = extended.provenance.at(c.function);
        if (p.kind != Provenance::Kind::Delta) {
            out.constraints.push_back(c);
            continue;
        }
        const auto u = c.vars[0];
        if (!pins[u])
            throw std::invalid_argument("fold_unaries: variable " + std::to_string(u) + " is not pinned to a copy");
        const Element v = *pins[u];
        const auto& f = inst.function(c);
        std::uint64_t mask = 0;
        for (Value a = 0; a < ld.base_size(); ++a)
            if (f({ld.embed(v, a)}) == CostValue(1))
                mask |= std::uint64_t(1) << a;
        auto j = find_unary_indicator(base, mask);
        if (!j)
            throw std::logic_error("fold_unaries: conservative language lacks a unary");
        auto it = lifted_unary.find({*j, v});
        if (it == lifted_unary.end())
            throw std::logic_error("fold_unaries: lifted unary missing for a unary-complete structure");
        out.constraints.push_back({it->second, {u}, c.weight});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Max weight independent set

struct WeightedGraph {
    Graph graph;
    /// Node weights; positive for user-facing instances.
    std::vector<Rational> weights;
};

inline WeightedGraph make_weighted_graph(
    std::size_t n, std::vector<std::pair<Element, Element>> edges, std::vector<Rational> weights)
{
    if (weights.size() != n)
        throw std::invalid_argument("weighted graph: one weight per node required");
    return WeightedGraph{Graph::make(n, std::move(edges)), std::move(weights)};
}

struct IndependentSet {
    std::vector<Element> nodes;
    Rational weight{0};
};

/// Exact maximum-weight independent set by include/exclude branching with an
/// optimistic bound. Ties resolve toward including lower-indexed nodes.
inline IndependentSet max_weight_independent_set(const WeightedGraph& g)
{
    const std::size_t n = g.graph.n;
    auto adj = g.graph.adjacency();
    std::vector<char> blocked(n, 0);
    std::vector<Element> current;
    IndependentSet best;
    bool have = false;

    std::function<void(std::size_t, Rational)> rec = [&](std::size_t v, Rational acc) {
        Rational bound = acc;
        for (std::size_t w = v; w < n; ++w)
            if (!blocked[w] && g.weights[w].sign() > 0)
                bound += g.weights[w];
        if (have && bound <= best.weight)
            return;
        if (v == n) {
            best = {current, acc};
            have = true;
            return;
        }
        if (!blocked[v] && g.weights[v].sign() > 0) {
            std::vector<Element> newly;
            for (auto w : adj[v])
                if (!blocked[w]) {
                    blocked[w] = 1;
                    newly.push_back(w);
                }
            current.push_back(static_cast<Element>(v));
            rec(v + 1, acc + g.weights[v]);
            current.pop_back();
            for (auto w : newly)
                blocked[w] = 0;
        }
        rec(v + 1, acc);
    };
    rec(0, Rational(0));
    return best;
}

struct MwisEncoding {
    std::shared_ptr<const ValuedLanguage> language;
    RelationalStructure structure;
    Instance instance;
    /// instance value + offset = -(weight of the independent set labeled 1).
    Rational offset{0};
};

/// Edge constraints f on the forward orientation; node v contributes
/// w_v * [x_v = 0], so minimizing the instance maximizes the set weight.
inline MwisEncoding mwis_to_vcsp(const WeightedGraph& g)
{
    for (const auto& w : g.weights)
        if (w.sign() <= 0)
            throw std::invalid_argument("mwis_to_vcsp: node weights must be positive");
    MwisEncoding enc;
    enc.language = mwis_language();
    std::vector<Element> all(g.graph.n);
    for (Element v = 0; v < g.graph.n; ++v)
        all[v] = v;
    // Unary slots follow mwis_language: masks 0, 1, 2, 3. Mask 1 is [x = 0].
    enc.structure = hg_structure(g.graph.forward_orientation(), {{}, all, {}, {}});
    enc.instance = instance_from_structure(enc.structure, enc.language, [&](std::size_t i, const Tuple& t) {
        return i == 2 ? g.weights[t[0]] : Rational(1);
    });
    Rational total(0);
    for (const auto& w : g.weights)
        total += w;
    enc.offset = -total;
    return enc;
}

struct MwisReduction {
    /// Merged unary weight w_v per variable: cost(1) - cost(0) summed over unaries.
    std::vector<Rational> merged;
    Rational constant{0};
    /// Variables forced to 0 by a constraint f(x_v, x_v).
    std::vector<char> forced_zero;
    /// Induced subgraph on V^- with positive weights -w_v.
    WeightedGraph negative_part;
    /// negative_nodes[i] is the instance variable of G^- node i.
    std::vector<Element> negative_nodes;
    std::size_t num_vars = 0;

    /// Labels the chosen G^- nodes 1 and every other variable 0.
    [[nodiscard]] Assignment assemble(const std::vector<Element>& chosen) const
    {
        Assignment h(num_vars, 0);
        for (auto i : chosen)
            h.at(negative_nodes.at(i)) = 1;
        return h;
    }
};

namespace detail {

    inline bool is_mwis_edge(const CostFunction& f)
    {
        static const auto edge = mwis_language()->functions[0];
        return f.arity() == 2 && f.domain_size() == 2 && f == edge;
    }

}  // namespace detail

/// Merges unary terms, keeps the nodes with negative merged weight and hands
/// their induced subgraph to an independent-set solver.
inline MwisReduction vcsp_to_mwis(const Instance& inst)
{
    inst.check();
    if (inst.domain_size() != 2)
        throw std::invalid_argument("vcsp_to_mwis: Boolean domain required");
    MwisReduction red;
    red.num_vars = inst.num_vars;
    red.merged.assign(inst.num_vars, Rational(0));
    red.forced_zero.assign(inst.num_vars, 0);
    std::vector<std::pair<Element, Element>> edges;
    for (const auto& c : inst.constraints) {
        const auto& f = inst.function(c);
        if (f.arity() == 1) {
            if (f({0}).is_infinite() || f({1}).is_infinite())
                throw std::invalid_argument("vcsp_to_mwis: unary terms must be finite-valued");
            red.merged[c.vars[0]] += c.weight * (f({1}).value() - f({0}).value());
            red.constant += c.weight * f({0}).value();
        } else if (detail::is_mwis_edge(f)) {
            auto u = static_cast<Element>(c.vars[0]), v = static_cast<Element>(c.vars[1]);
            if (u == v)
                red.forced_zero[u] = 1;
            else
                edges.emplace_back(u, v);
        } else {
            throw std::invalid_argument("vcsp_to_mwis: constraint outside the independent-set language shape");
        }
    }
    std::vector<std::size_t> local(inst.num_vars, SIZE_MAX);
    std::vector<Rational> weights;
    for (Element v = 0; v < inst.num_vars; ++v)
        if (red.merged[v].sign() < 0 && !red.forced_zero[v]) {
            local[v] = red.negative_nodes.size();
            red.negative_nodes.push_back(v);
            weights.push_back(-red.merged[v]);
        }
    std::vector<std::pair<Element, Element>> sub;
    for (auto [u, v] : edges)
        if (local[u] != SIZE_MAX && local[v] != SIZE_MAX)
            sub.emplace_back(static_cast<Element>(local[u]), static_cast<Element>(local[v]));
    red.negative_part = make_weighted_graph(red.negative_nodes.size(), sub, weights);
    return red;
}

struct MwisSolution {
    Assignment assignment;
    CostValue value;
    IndependentSet set;
};

/// vcsp_to_mwis followed by the exact independent-set solver and assembly.
inline MwisSolution solve_via_mwis(const Instance& inst)
{
    auto red = vcsp_to_mwis(inst);
    auto set = max_weight_independent_set(red.negative_part);
    auto h = red.assemble(set.nodes);
    return {h, evaluate(inst, h), set};
}

}  // namespace hcsp
