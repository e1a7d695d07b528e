#pragma once

// Seeded generators for structures, graphs, languages and instances.
//
// All randomness comes from SplitMix64 (state += 0x9E3779B97F4A7C15, then the
// standard xor-shift-multiply finalizer), so a seed reproduces the same
// stream on any platform. Bounded draws use rejection on the top of the
// range, never modulo bias.

#include "hcsp/constructions.hpp"
#include "hcsp/lifting.hpp"
#include "hcsp/reductions.hpp"
#include "hcsp/structure.hpp"
#include "hcsp/vcsp.hpp"

#include <algorithm>
#include <cstdint>
#include <memory>
#include <vector>

namespace hcsp {

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next()
    {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, n).
    std::uint64_t below(std::uint64_t n)
    {
        if (n == 0)
            throw std::invalid_argument("below(0)");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do
            x = next();
        while (x >= limit);
        return x % n;
    }

    /// Uniform in [lo, hi].
    std::uint64_t between(std::uint64_t lo, std::uint64_t hi) { return lo + below(hi - lo + 1); }

    /// True with probability num/den.
    bool chance(std::uint64_t num, std::uint64_t den) { return below(den) < num; }

private:
    std::uint64_t state_;
};

/// Each tuple of each relation present independently with probability num/den.
inline RelationalStructure random_structure(
    SplitMix64& rng, std::size_t n, const Signature& sig, std::uint64_t num, std::uint64_t den)
{
    std::vector<std::vector<Tuple>> rels(sig.size());
    for (std::size_t i = 0; i < sig.size(); ++i) {
        const auto total = *checked_power(n, sig.arities[i]);
        std::vector<Value> x(sig.arities[i]);
        for (std::uint64_t c = 0; c < total; ++c)
            if (rng.chance(num, den)) {
                decode_tuple(c, n, x);
                rels[i].emplace_back(x.begin(), x.end());
            }
    }
    return RelationalStructure(n, sig, std::move(rels));
}

/// Random structure whose relations are all nonempty.
inline RelationalStructure random_nonempty_structure(
    SplitMix64& rng, std::size_t n, const Signature& sig, std::uint64_t num, std::uint64_t den)
{
    auto s = random_structure(rng, n, sig, num, den);
    auto rels = s.relations();
    for (std::size_t i = 0; i < rels.size(); ++i)
        if (rels[i].empty()) {
            Tuple t(sig.arities[i]);
            for (auto& e : t)
                e = static_cast<Element>(rng.below(n));
            rels[i].push_back(t);
        }
    return RelationalStructure(n, sig, std::move(rels));
}

/// Only strictly increasing tuples, each kept with probability num/den.
inline RelationalStructure random_ordered_structure(
    SplitMix64& rng, std::size_t n, const Signature& sig, std::uint64_t num, std::uint64_t den)
{
    std::vector<std::vector<Tuple>> rels(sig.size());
    for (std::size_t i = 0; i < sig.size(); ++i) {
        const auto total = *checked_power(n, sig.arities[i]);
        std::vector<Value> x(sig.arities[i]);
        for (std::uint64_t c = 0; c < total; ++c) {
            decode_tuple(c, n, x);
            if (!std::is_sorted(x.begin(), x.end()) || std::adjacent_find(x.begin(), x.end()) != x.end())
                continue;
            if (rng.chance(num, den))
                rels[i].emplace_back(x.begin(), x.end());
        }
    }
    return RelationalStructure(n, sig, std::move(rels));
}

inline Graph random_graph(SplitMix64& rng, std::size_t n, std::uint64_t num, std::uint64_t den)
{
    std::vector<std::pair<Element, Element>> edges;
    for (Element u = 0; u < n; ++u)
        for (Element v = u + 1; v < n; ++v)
            if (rng.chance(num, den))
                edges.emplace_back(u, v);
    return Graph::make(n, std::move(edges));
}

/// Positive rational p/q with 1 <= p <= max_num, 1 <= q <= max_den.
inline Rational random_positive_rational(SplitMix64& rng, std::int64_t max_num, std::int64_t max_den)
{
    auto p = static_cast<std::int64_t>(rng.between(1, max_num));
    auto q = static_cast<std::int64_t>(rng.between(1, max_den));
    return Rational(p, q);
}

inline WeightedGraph random_weighted_graph(SplitMix64& rng, std::size_t n)
{
    auto g = random_graph(rng, n, 1, 2);
    std::vector<Rational> w;
    for (std::size_t v = 0; v < n; ++v)
        w.push_back(random_positive_rational(rng, 9, 4));
    return WeightedGraph{std::move(g), std::move(w)};
}

/// Cells drawn from {0, 1, 2, 1/2, INF}; INF with probability inf_num/inf_den.
inline CostFunction random_cost_function(
    SplitMix64& rng, std::size_t d, std::size_t ar, std::uint64_t inf_num, std::uint64_t inf_den)
{
    static const Rational finite[] = {Rational(0), Rational(1), Rational(2), Rational(1, 2)};
    const auto n = *checked_power(d, ar);
    std::vector<CostValue> t(n);
    for (auto& c : t)
        c = rng.chance(inf_num, inf_den) ? CostValue::infinity() : CostValue(finite[rng.below(4)]);
    return CostFunction::dense(d, ar, std::move(t));
}

inline std::shared_ptr<const ValuedLanguage> random_language(
    SplitMix64& rng, std::size_t d, const std::vector<std::size_t>& arities)
{
    auto lang = std::make_shared<ValuedLanguage>();
    lang->domain_size = d;
    for (std::size_t i = 0; i < arities.size(); ++i) {
        lang->functions.push_back(random_cost_function(rng, d, arities[i], 1, 4));
        lang->names.push_back("f" + std::to_string(i));
    }
    return lang;
}

/// All 2^d unary {0,1}-tables (mask order) followed by the given functions.
inline std::shared_ptr<const ValuedLanguage> conservative_language(std::size_t d, const std::vector<CostFunction>& extra)
{
    auto lang = std::make_shared<ValuedLanguage>();
    lang->domain_size = d;
    for (std::uint64_t m = 0; m < (std::uint64_t(1) << d); ++m) {
        lang->functions.push_back(unary_indicator(d, m));
        lang->names.push_back("u" + std::to_string(m));
    }
    for (std::size_t i = 0; i < extra.size(); ++i) {
        lang->functions.push_back(extra[i]);
        lang->names.push_back("f" + std::to_string(i));
    }
    return lang;
}

inline Instance random_instance(SplitMix64& rng, std::shared_ptr<const ValuedLanguage> lang, std::size_t n, std::size_t m)
{
    Instance inst{lang, n, {}};
    for (std::size_t c = 0; c < m; ++c) {
        auto f = rng.below(lang->size());
        std::vector<std::size_t> vars(lang->functions[f].arity());
        for (auto& v : vars)
            v = rng.below(n);
        inst.constraints.push_back({f, vars, random_positive_rational(rng, 5, 3)});
    }
    return inst;
}

// ---------------------------------------------------------------------------
// Lifted-instance trials

struct LiftedTrial {
    std::shared_ptr<const ValuedLanguage> base;
    RelationalStructure r;
    LiftedLanguage lifted;
    Instance instance;
};

namespace detail {

    // Indices of lifted functions (Lifted provenance) by relation tuple.
    inline std::vector<std::size_t> lifted_indices(const LiftedLanguage& ll)
    {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < ll.provenance.size(); ++i)
            if (ll.provenance[i].kind == Provenance::Kind::Lifted)
                out.push_back(i);
        return out;
    }

    inline std::size_t copy_index(const LiftedLanguage& ll, Element v)
    {
        for (std::size_t i = 0; i < ll.provenance.size(); ++i)
            if (ll.provenance[i].kind == Provenance::Kind::Copy && ll.provenance[i].vertices[0] == v)
                return i;
        throw std::logic_error("copy unary missing");
    }

    // Constraint on a lifted function whose scope follows phi where possible;
    // with probability stray_num/stray_den a position takes any variable.
    inline std::optional<Constraint> lifted_constraint(SplitMix64& rng, const LiftedLanguage& ll,
        const std::vector<std::size_t>& lifted, const std::vector<Element>& phi, std::uint64_t stray_num,
        std::uint64_t stray_den)
    {
        if (lifted.empty())
            return std::nullopt;
        auto fi = lifted[rng.below(lifted.size())];
        const auto& p = ll.provenance[fi];
        std::vector<std::size_t> vars;
        for (auto v : p.vertices) {
            std::vector<std::size_t> cands;
            for (std::size_t u = 0; u < phi.size(); ++u)
                if (phi[u] == v)
                    cands.push_back(u);
            if (cands.empty() || rng.chance(stray_num, stray_den))
                vars.push_back(rng.below(phi.size()));
            else
                vars.push_back(cands[rng.below(cands.size())]);
        }
        return Constraint{fi, vars, random_positive_rational(rng, 4, 3)};
    }

}  // namespace detail

/// Base language with |D| in [1,3], structure with |V| in [1,4], and an
/// instance with at most max_vars variables over the lifted language. Most
/// scopes follow a hidden map phi; a few stray positions create conflicts,
/// and some variables only receive copy unaries.
inline LiftedTrial random_lifted_trial(SplitMix64& rng, std::size_t max_vars = 6)
{
    LiftedTrial t;
    const std::size_t d = rng.between(1, 3);
    std::vector<std::size_t> arities;
    const std::size_t k = rng.between(1, 3);
    for (std::size_t i = 0; i < k; ++i)
        arities.push_back(rng.between(1, 2));
    if (rng.chance(1, 4))
        arities.push_back(3);
    t.base = random_language(rng, d, arities);
    const std::size_t nv = rng.between(1, 4);
    t.r = random_nonempty_structure(rng, nv, t.base->signature(), 1, 3);
    t.lifted = lift_language(*t.base, t.r);
    const std::size_t n = rng.between(1, max_vars);
    std::vector<Element> phi(n);
    for (auto& v : phi)
        v = static_cast<Element>(rng.below(nv));
    t.instance = Instance{t.lifted.language, n, {}};
    auto lifted = detail::lifted_indices(t.lifted);
    const std::size_t m = rng.between(1, 2 * n + 1);
    for (std::size_t c = 0; c < m; ++c) {
        if (rng.chance(1, 5)) {
            auto u = rng.below(n);
            auto v = rng.chance(1, 6) ? static_cast<Element>(rng.below(nv)) : phi[u];
            t.instance.constraints.push_back({detail::copy_index(t.lifted, v), {u}, random_positive_rational(rng, 3, 2)});
        } else if (auto con = detail::lifted_constraint(rng, t.lifted, lifted, phi, 1, 12)) {
            t.instance.constraints.push_back(*con);
        }
    }
    return t;
}

struct FoldTrial {
    std::shared_ptr<const ValuedLanguage> base;
    RelationalStructure r;
    LiftedLanguage lifted;
    /// lifted plus the Delta members used by the instance.
    LiftedLanguage extended;
    Instance instance;
};

/// Conservative base language on |D| in {2,3}, unary-complete R with
/// |V| <= 3, and an instance over Gamma_R ∪ Delta_R where every variable is
/// pinned to the copy phi(u).
inline FoldTrial random_fold_trial(SplitMix64& rng, std::size_t max_vars = 4)
{
    FoldTrial t;
    const std::size_t d = rng.between(2, 3);
    std::vector<CostFunction> extra;
    const std::size_t nb = rng.between(1, 2);
    for (std::size_t i = 0; i < nb; ++i)
        extra.push_back(random_cost_function(rng, d, 2, 1, 5));
    t.base = conservative_language(d, extra);
    const std::size_t nv = rng.between(1, d == 2 ? 3 : 2);
    auto r = random_nonempty_structure(rng, nv, t.base->signature(), 1, 3);
    t.r = unary_completion(r);
    t.lifted = lift_language(*t.base, t.r);
    const std::size_t n = rng.between(1, max_vars);
    std::vector<Element> phi(n);
    for (auto& v : phi)
        v = static_cast<Element>(rng.below(nv));

    std::vector<Constraint> cons;
    std::vector<std::uint64_t> masks;
    auto lifted = detail::lifted_indices(t.lifted);
    // Pin every variable through a lifted unary or a copy unary.
    for (std::size_t u = 0; u < n; ++u) {
        if (rng.chance(1, 2)) {
            cons.push_back({detail::copy_index(t.lifted, phi[u]), {u}, Rational(1)});
        } else {
            std::vector<std::size_t> cand;
            for (auto i : lifted)
                if (t.lifted.provenance[i].vertices.size() == 1 && t.lifted.provenance[i].vertices[0] == phi[u])
                    cand.push_back(i);
            cons.push_back({cand[rng.below(cand.size())], {u}, random_positive_rational(rng, 3, 2)});
        }
    }
    const std::size_t m = rng.between(1, 2 * n);
    const std::size_t dr = t.lifted.domain.size();
    for (std::size_t c = 0; c < m; ++c) {
        if (rng.chance(1, 2)) {
            auto u = rng.below(n);
            masks.push_back(rng.below(std::uint64_t(1) << dr));
            cons.push_back({t.lifted.size() + masks.size() - 1, {u}, random_positive_rational(rng, 3, 2)});
        } else if (auto con = detail::lifted_constraint(rng, t.lifted, lifted, phi, 0, 1)) {
            cons.push_back(*con);
        }
    }
    t.extended = with_delta(t.lifted, masks).first;
    t.instance = Instance{t.extended.language, n, std::move(cons)};
    return t;
}

}  // namespace hcsp
