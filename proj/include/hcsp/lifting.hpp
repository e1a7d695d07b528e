#pragma once

// The lifted language over disjoint copies of the base domain, one copy per
// structure element, together with unary completion and the set of
// {0,1}-valued unaries on the lifted domain.

#include "hcsp/vcsp.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace hcsp {

/// Copies D_v of the base domain, encoded as v*|D| + a.
class LiftedDomain {
public:
    LiftedDomain() = default;
    LiftedDomain(std::size_t base, std::size_t vertices) : base_(base), vertices_(vertices)
    {
        if (base == 0)
            throw std::invalid_argument("lifted domain needs a nonempty base domain");
    }

    [[nodiscard]] std::size_t base_size() const { return base_; }
    [[nodiscard]] std::size_t num_vertices() const { return vertices_; }
    [[nodiscard]] std::size_t size() const { return base_ * vertices_; }

    [[nodiscard]] Value embed(Element v, Value a) const
    {
        if (v >= vertices_ || a >= base_)
            throw std::out_of_range("embed: vertex or value out of range");
        return static_cast<Value>(v * base_ + a);
    }
    [[nodiscard]] Value project(Value b) const
    {
        if (b >= size())
            throw std::out_of_range("project: value outside lifted domain");
        return static_cast<Value>(b % base_);
    }
    /// The vertex whose copy contains b.
    [[nodiscard]] Element copy_of(Value b) const
    {
        if (b >= size())
            throw std::out_of_range("copy_of: value outside lifted domain");
        return static_cast<Element>(b / base_);
    }

    [[nodiscard]] std::vector<Value> embed(const Tuple& v, const std::vector<Value>& a) const
    {
        if (v.size() != a.size())
            throw std::invalid_argument("embed: tuple lengths differ");
        std::vector<Value> out(a.size());
        for (std::size_t j = 0; j < a.size(); ++j)
            out[j] = embed(v[j], a[j]);
        return out;
    }
    [[nodiscard]] std::vector<Value> project(const std::vector<Value>& b) const
    {
        std::vector<Value> out(b.size());
        for (std::size_t j = 0; j < b.size(); ++j)
            out[j] = project(b[j]);
        return out;
    }

    friend bool operator==(const LiftedDomain&, const LiftedDomain&) = default;

private:
    std::size_t base_ = 1;
    std::size_t vertices_ = 0;
};

/// Where a function of a lifted language comes from.
struct Provenance {
    enum class Kind { Lifted, Copy, Delta };
    Kind kind = Kind::Lifted;
    /// Base relation index i for Lifted.
    std::size_t relation = 0;
    /// The tuple v for Lifted, the single vertex for Copy, empty for Delta.
    Tuple vertices;

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct LiftedLanguage {
    LiftedDomain domain;
    std::shared_ptr<const ValuedLanguage> language;
    std::vector<Provenance> provenance;

    [[nodiscard]] std::size_t size() const { return provenance.size(); }
};

/// f^v: f(y) on x = d_v(y), ∞ elsewhere.
inline CostFunction lift_function(const CostFunction& f, const Tuple& v, const LiftedDomain& ld)
{
    if (v.size() != f.arity())
        throw std::invalid_argument("lift_function: vertex tuple length differs from arity");
    if (f.domain_size() != ld.base_size())
        throw std::invalid_argument("lift_function: base domain mismatch");
    const std::size_t ar = f.arity();
    const std::size_t big = ld.size();
    std::vector<std::pair<std::uint64_t, CostValue>> cells;
    std::vector<Value> y(ar);
    for (std::uint64_t i = 0; i < f.table_size(); ++i) {
        decode_tuple(i, f.domain_size(), y);
        auto x = ld.embed(v, y);
        cells.emplace_back(encode_tuple(x, big), f.at(i));
    }
    return CostFunction::sparse(big, ar, CostValue::infinity(), cells);
}

/// Copy-membership unary D_v: 0 on the copy of v, ∞ elsewhere.
inline CostFunction copy_unary(Element v, const LiftedDomain& ld)
{
    std::vector<CostValue> t(ld.size(), CostValue::infinity());
    for (Value a = 0; a < ld.base_size(); ++a)
        t[ld.embed(v, a)] = CostValue(0);
    return CostFunction::dense(ld.size(), 1, std::move(t));
}

inline std::string tuple_label(const Tuple& v)
{
    std::string s;
    for (std::size_t j = 0; j < v.size(); ++j) {
        if (j)
            s += ',';
        s += std::to_string(v[j]);
    }
    return s;
}

/// Lifted functions f_i^v (i ascending, v in relation order) followed by the
/// copy unaries D_v (v ascending).
inline LiftedLanguage lift_language(const ValuedLanguage& base, const RelationalStructure& r)
{
    if (!(base.signature() == r.signature()))
        throw std::invalid_argument("lift_language: signature mismatch");
    LiftedLanguage out;
    out.domain = LiftedDomain(base.domain_size, r.universe_size());
    auto lang = std::make_shared<ValuedLanguage>();
    lang->domain_size = out.domain.size();
    for (std::size_t i = 0; i < r.num_relations(); ++i)
        for (const auto& v : r.relation(i)) {
            lang->functions.push_back(lift_function(base.functions[i], v, out.domain));
            lang->names.push_back(base.name(i) + "@" + tuple_label(v));
            out.provenance.push_back({Provenance::Kind::Lifted, i, v});
        }
    for (Element v = 0; v < r.universe_size(); ++v) {
        lang->functions.push_back(copy_unary(v, out.domain));
        lang->names.push_back("D@" + std::to_string(v));
        out.provenance.push_back({Provenance::Kind::Copy, 0, {v}});
    }
    out.language = std::move(lang);
    return out;
}

/// Every unary relation replaced by the full universe.
inline RelationalStructure unary_completion(const RelationalStructure& r)
{
    auto rels = r.relations();
    for (std::size_t i = 0; i < rels.size(); ++i)
        if (r.arity(i) == 1) {
            rels[i].clear();
            for (Element v = 0; v < r.universe_size(); ++v)
                rels[i].push_back({v});
        }
    return RelationalStructure(r.universe_size(), r.signature(), std::move(rels));
}

inline bool is_unary_complete(const RelationalStructure& r) { return unary_completion(r) == r; }

/// Lazily enumerated {0,1}-valued unary tables on a lifted domain; member
/// `mask` has value bit a of mask at point a.
class DeltaSet {
public:
    static constexpr std::size_t kMaxDomain = 62;

    explicit DeltaSet(const LiftedDomain& ld) : size_(ld.size())
    {
        if (size_ > kMaxDomain)
            throw std::invalid_argument("DeltaSet: lifted domain too large to index");
    }

    [[nodiscard]] std::size_t domain_size() const { return size_; }
    [[nodiscard]] std::uint64_t count() const { return std::uint64_t(1) << size_; }
    [[nodiscard]] CostFunction member(std::uint64_t mask) const
    {
        if (mask >= count())
            throw std::out_of_range("DeltaSet member out of range");
        return unary_indicator(size_, mask);
    }
    [[nodiscard]] bool contains(const CostFunction& f) const
    {
        return f.domain_size() == size_ && zero_one_mask(f).has_value();
    }

    template <typename Fn>
    void for_each(Fn&& fn) const
    {
        for (std::uint64_t m = 0; m < count(); ++m)
            fn(m, member(m));
    }

private:
    std::size_t size_;
};

inline DeltaSet delta(const LiftedDomain& ld) { return DeltaSet(ld); }

/// Appends the given Δ members to a lifted language (for Γ_R ∪ Δ_R instances).
/// Returns the language and the indices of the appended functions.
inline std::pair<LiftedLanguage, std::vector<std::size_t>> with_delta(
    const LiftedLanguage& lifted, const std::vector<std::uint64_t>& masks)
{
    LiftedLanguage out = lifted;
    auto lang = std::make_shared<ValuedLanguage>(*lifted.language);
    DeltaSet ds(lifted.domain);
    std::vector<std::size_t> idx;
    for (auto m : masks) {
        idx.push_back(lang->functions.size());
        lang->functions.push_back(ds.member(m));
        lang->names.push_back("delta_" + std::to_string(m));
        out.provenance.push_back({Provenance::Kind::Delta, 0, {}});
    }
    out.language = std::move(lang);
    return {out, idx};
}

}  // namespace hcsp
