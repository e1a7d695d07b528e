#pragma once

// Signatures, finite relational structures, homomorphisms and orderability.
//
// Universes are always 0..n-1. Relations are kept as sorted, duplicate-free
// tuple lists so that every downstream iteration order is deterministic.

#include "hcsp/search.hpp"

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace hcsp {

using Element = std::uint32_t;
using Tuple = std::vector<Element>;
/// Total map from a source universe into a target universe.
using VertexMap = std::vector<Element>;
/// Ordering of a universe: rank[v] is the position of v, a bijection onto 0..n-1.
using Ordering = std::vector<std::size_t>;

struct Signature {
    std::vector<std::size_t> arities;

    [[nodiscard]] std::size_t size() const { return arities.size(); }
    friend bool operator==(const Signature&, const Signature&) = default;
};

/// True iff every relation slot is unary.
inline bool is_all_unary(const Signature& sig)
{
    return std::all_of(sig.arities.begin(), sig.arities.end(), [](auto a) { return a == 1; });
}

class RelationalStructure {
public:
    RelationalStructure() = default;

    /// Tuples are sorted and deduplicated; well-formedness is checked by validate().
    RelationalStructure(std::size_t universe_size, Signature sig, std::vector<std::vector<Tuple>> relations)
        : n_(universe_size), sig_(std::move(sig)), rels_(std::move(relations))
    {
        if (rels_.size() != sig_.size())
            throw std::invalid_argument("relation count does not match signature");
        for (auto& r : rels_) {
            std::sort(r.begin(), r.end());
            r.erase(std::unique(r.begin(), r.end()), r.end());
        }
        build_index();
    }

    [[nodiscard]] std::size_t universe_size() const { return n_; }
    [[nodiscard]] const Signature& signature() const { return sig_; }
    [[nodiscard]] std::size_t num_relations() const { return rels_.size(); }
    [[nodiscard]] std::size_t arity(std::size_t i) const { return sig_.arities.at(i); }
    [[nodiscard]] const std::vector<Tuple>& relation(std::size_t i) const { return rels_.at(i); }
    [[nodiscard]] const std::vector<std::vector<Tuple>>& relations() const { return rels_; }

    [[nodiscard]] bool contains(std::size_t i, std::span<const Element> t) const
    {
        const auto& r = rels_.at(i);
        if (!hashed_[i].empty()) {
            if (t.size() != sig_.arities[i])
                return false;
            auto key = encode(t);
            return key && hashed_[i].count(*key) > 0;
        }
        return std::binary_search(r.begin(), r.end(), t,
            [](const auto& a, const auto& b) {
                return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
            });
    }

    friend bool operator==(const RelationalStructure& a, const RelationalStructure& b)
    {
        return a.n_ == b.n_ && a.sig_ == b.sig_ && a.rels_ == b.rels_;
    }

private:
    static constexpr std::size_t kHashThreshold = 64;

    std::size_t n_ = 0;
    Signature sig_;
    std::vector<std::vector<Tuple>> rels_;
    std::vector<std::unordered_set<std::uint64_t>> hashed_;

    [[nodiscard]] bool encodable(std::size_t arity) const
    {
        long double cap = 1;
        for (std::size_t j = 0; j < arity; ++j)
            cap *= static_cast<long double>(n_ + 1);
        return cap < 1.8e19L;
    }

    [[nodiscard]] std::optional<std::uint64_t> encode(std::span<const Element> t) const
    {
        if (!encodable(t.size()))
            return std::nullopt;
        std::uint64_t key = 0;
        for (auto e : t) {
            if (e >= n_)
                return std::uint64_t(-1);
            key = key * (n_ + 1) + e;
        }
        return key;
    }

    void build_index()
    {
        hashed_.assign(rels_.size(), {});
        for (std::size_t i = 0; i < rels_.size(); ++i) {
            if (rels_[i].size() <= kHashThreshold || !encodable(sig_.arities[i]))
                continue;
            bool ok = true;
            for (const auto& t : rels_[i])
                ok &= t.size() == sig_.arities[i];
            if (!ok)
                continue;
            for (const auto& t : rels_[i])
                if (auto key = encode(t))
                    hashed_[i].insert(*key);
        }
    }
};

struct ValidationReport {
    bool ok = true;
    std::optional<std::size_t> relation;
    std::optional<Tuple> tuple;
    std::string message;
};

/// Checks signature agreement, tuple arities and tuple ranges. The report
/// names the first failing relation and tuple.
inline ValidationReport validate(const RelationalStructure& s, const Signature& sig)
{
    ValidationReport rep;
    if (sig.arities.empty()) {
        rep.ok = false;
        rep.message = "signature has no relation slots";
        return rep;
    }
    for (auto a : sig.arities)
        if (a == 0) {
            rep.ok = false;
            rep.message = "signature arity 0";
            return rep;
        }
    if (s.num_relations() != sig.size()) {
        rep.ok = false;
        rep.message = "structure has " + std::to_string(s.num_relations()) + " relations, signature "
            + std::to_string(sig.size());
        return rep;
    }
    for (std::size_t i = 0; i < sig.size(); ++i) {
        for (const auto& t : s.relation(i)) {
            if (t.size() != sig.arities[i]) {
                rep = {false, i, t, "tuple arity " + std::to_string(t.size()) + " != " + std::to_string(sig.arities[i])};
                return rep;
            }
            for (auto e : t)
                if (e >= s.universe_size()) {
                    rep = {false, i, t, "entry " + std::to_string(e) + " outside universe"};
                    return rep;
                }
        }
    }
    return rep;
}

/// Builds a structure and throws std::invalid_argument if it is malformed.
inline RelationalStructure make_structure(std::size_t n, Signature sig, std::vector<std::vector<Tuple>> relations)
{
    RelationalStructure s(n, sig, std::move(relations));
    auto rep = validate(s, sig);
    if (!rep.ok)
        throw std::invalid_argument("malformed structure: " + rep.message);
    return s;
}

struct HomomorphismCheck {
    bool ok = true;
    std::optional<std::size_t> relation;
    /// Source tuple whose image leaves the target relation.
    std::optional<Tuple> counterexample;

    explicit operator bool() const { return ok; }
};

inline HomomorphismCheck is_homomorphism(
    const VertexMap& h, const RelationalStructure& src, const RelationalStructure& dst)
{
    if (!(src.signature() == dst.signature()))
        throw std::invalid_argument("signature mismatch");
    if (h.size() != src.universe_size())
        throw std::invalid_argument("map is not total on the source universe");
    for (auto e : h)
        if (e >= dst.universe_size())
            throw std::invalid_argument("map image outside target universe");
    Tuple img;
    for (std::size_t i = 0; i < src.num_relations(); ++i)
        for (const auto& t : src.relation(i)) {
            img.resize(t.size());
            for (std::size_t j = 0; j < t.size(); ++j)
                img[j] = h[t[j]];
            if (!dst.contains(i, img))
                return {false, i, t};
        }
    return {};
}

/// Lexicographically least homomorphism src -> dst, if one exists.
inline std::optional<VertexMap> find_homomorphism(
    const RelationalStructure& src, const RelationalStructure& dst, SearchStats* stats = nullptr)
{
    if (!(src.signature() == dst.signature()))
        throw std::invalid_argument("signature mismatch");
    if (src.universe_size() == 0)
        return VertexMap{};
    if (dst.universe_size() == 0)
        return std::nullopt;
    TableCsp csp(src.universe_size(), dst.universe_size());
    for (std::size_t i = 0; i < src.num_relations(); ++i) {
        if (src.relation(i).empty())
            continue;
        auto table = csp.add_table(dst.relation(i));
        for (const auto& t : src.relation(i))
            csp.add_constraint(std::vector<std::size_t>(t.begin(), t.end()), table);
    }
    auto sol = csp.solve(stats);
    if (!sol)
        return std::nullopt;
    return VertexMap(sol->begin(), sol->end());
}

/// Orders the universe so that every relation tuple strictly increases, if
/// possible. Ties in the topological sort are broken by smallest element.
inline std::optional<Ordering> find_ordering(const RelationalStructure& s)
{
    const auto n = s.universe_size();
    std::vector<std::vector<Element>> succ(n);
    std::vector<std::size_t> indeg(n, 0);
    for (const auto& rel : s.relations())
        for (const auto& t : rel)
            for (std::size_t j = 0; j + 1 < t.size(); ++j) {
                succ[t[j]].push_back(t[j + 1]);
            }
    for (auto& out : succ) {
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        for (auto w : out)
            ++indeg[w];
    }
    std::priority_queue<Element, std::vector<Element>, std::greater<>> ready;
    for (Element v = 0; v < n; ++v)
        if (indeg[v] == 0)
            ready.push(v);
    Ordering rank(n, 0);
    std::size_t next = 0;
    while (!ready.empty()) {
        auto v = ready.top();
        ready.pop();
        rank[v] = next++;
        for (auto w : succ[v])
            if (--indeg[w] == 0)
                ready.push(w);
    }
    if (next != n)
        return std::nullopt;
    return rank;
}

/// True iff every tuple of every relation strictly increases under rank.
inline bool is_valid_ordering(const RelationalStructure& s, const Ordering& rank)
{
    if (rank.size() != s.universe_size())
        return false;
    std::vector<char> seen(rank.size(), 0);
    for (auto r : rank) {
        if (r >= rank.size() || seen[r])
            return false;
        seen[r] = 1;
    }
    for (const auto& rel : s.relations())
        for (const auto& t : rel)
            for (std::size_t j = 0; j + 1 < t.size(); ++j)
                if (!(rank[t[j]] < rank[t[j + 1]]))
                    return false;
    return true;
}

/// Pulls an ordering of dst back along a homomorphism h: src -> dst. Elements
/// with equal images are ordered by index.
inline Ordering order_pullback(const VertexMap& h, const RelationalStructure& src, const RelationalStructure& dst,
    const Ordering& dst_ordering)
{
    if (!is_homomorphism(h, src, dst))
        throw std::invalid_argument("order_pullback: map is not a homomorphism");
    if (!is_valid_ordering(dst, dst_ordering))
        throw std::invalid_argument("order_pullback: target ordering is not valid");
    std::vector<Element> elems(src.universe_size());
    for (Element v = 0; v < elems.size(); ++v)
        elems[v] = v;
    std::stable_sort(elems.begin(), elems.end(),
        [&](Element a, Element b) { return dst_ordering[h[a]] < dst_ordering[h[b]]; });
    Ordering rank(src.universe_size());
    for (std::size_t p = 0; p < elems.size(); ++p)
        rank[elems[p]] = p;
    return rank;
}

}  // namespace hcsp
