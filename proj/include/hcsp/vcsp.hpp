#pragma once

// Cost functions, valued languages, weighted instances, exact evaluation,
// brute-force minimization and gadget expression.

#include "hcsp/rational.hpp"
#include "hcsp/structure.hpp"

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace hcsp {

using Value = std::uint32_t;
using Assignment = std::vector<Value>;

/// Default ceiling on enumerated assignments; HCSP_BUDGET overrides it in the CLI.
inline constexpr std::uint64_t kDefaultBudget = 10'000'000;
/// Tables at most this large are stored densely.
inline constexpr std::uint64_t kDenseLimit = 1'000'000;

class BudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// |D|^arity, or nullopt if it does not fit in 64 bits.
inline std::optional<std::uint64_t> checked_power(std::uint64_t base, std::size_t exp)
{
    std::uint64_t r = 1;
    for (std::size_t i = 0; i < exp; ++i) {
        if (base != 0 && r > UINT64_MAX / base)
            return std::nullopt;
        r *= base;
    }
    return r;
}

/// Most-significant-first mixed-radix encoding of a tuple over [d].
inline std::uint64_t encode_tuple(std::span<const Value> x, std::size_t d)
{
    std::uint64_t idx = 0;
    for (auto a : x)
        idx = idx * d + a;
    return idx;
}

inline void decode_tuple(std::uint64_t idx, std::size_t d, std::span<Value> out)
{
    for (std::size_t j = out.size(); j-- > 0;) {
        out[j] = static_cast<Value>(idx % d);
        idx /= d;
    }
}

/// Total map D^arity -> Q ∪ {∞}. Small tables are dense; large ones keep a
/// default value plus the cells that differ from it.
class CostFunction {
public:
    CostFunction() = default;

    static CostFunction dense(std::size_t domain, std::size_t arity, std::vector<CostValue> table)
    {
        CostFunction f(domain, arity);
        if (table.size() != f.size_)
            throw std::invalid_argument("cost table size " + std::to_string(table.size()) + " != |D|^ar = "
                + std::to_string(f.size_));
        f.dense_ = std::move(table);
        f.is_dense_ = true;
        return f;
    }

    /// Builds from a default and explicit cells; densifies when small enough.
    static CostFunction sparse(
        std::size_t domain, std::size_t arity, CostValue fill, const std::vector<std::pair<std::uint64_t, CostValue>>& cells)
    {
        CostFunction f(domain, arity);
        for (const auto& [idx, _] : cells)
            if (idx >= f.size_)
                throw std::out_of_range("cost cell index out of range");
        if (f.size_ <= kDenseLimit) {
            f.dense_.assign(f.size_, fill);
            for (const auto& [idx, val] : cells)
                f.dense_[idx] = val;
            f.is_dense_ = true;
        } else {
            f.fill_ = fill;
            for (const auto& [idx, val] : cells) {
                if (val == fill)
                    f.cells_.erase(idx);
                else
                    f.cells_[idx] = val;
            }
            f.is_dense_ = false;
        }
        return f;
    }

    static CostFunction constant(std::size_t domain, std::size_t arity, CostValue c)
    {
        return sparse(domain, arity, c, {});
    }

    /// Crisp function from a relation: 0 on listed tuples, ∞ elsewhere.
    static CostFunction from_relation(std::size_t domain, std::size_t arity, const std::vector<Tuple>& tuples)
    {
        std::vector<std::pair<std::uint64_t, CostValue>> cells;
        cells.reserve(tuples.size());
        for (const auto& t : tuples) {
            if (t.size() != arity)
                throw std::invalid_argument("relation tuple arity mismatch");
            for (auto a : t)
                if (a >= domain)
                    throw std::out_of_range("relation tuple outside domain");
            cells.emplace_back(encode_tuple(t, domain), CostValue(0));
        }
        return sparse(domain, arity, CostValue::infinity(), cells);
    }

    /// Tabulates fn over every tuple; requires a dense-sized table.
    static CostFunction tabulate(std::size_t domain, std::size_t arity, const std::function<CostValue(std::span<const Value>)>& fn)
    {
        CostFunction f(domain, arity);
        if (f.size_ > kDenseLimit)
            throw BudgetExceeded("table too large to tabulate");
        f.dense_.resize(f.size_);
        std::vector<Value> x(arity);
        for (std::uint64_t i = 0; i < f.size_; ++i) {
            decode_tuple(i, domain, x);
            f.dense_[i] = fn(x);
        }
        f.is_dense_ = true;
        return f;
    }

    [[nodiscard]] std::size_t domain_size() const { return domain_; }
    [[nodiscard]] std::size_t arity() const { return arity_; }
    [[nodiscard]] std::uint64_t table_size() const { return size_; }
    [[nodiscard]] bool is_dense() const { return is_dense_; }

    [[nodiscard]] const CostValue& at(std::uint64_t idx) const
    {
        if (is_dense_)
            return dense_.at(idx);
        if (idx >= size_)
            throw std::out_of_range("cost index out of range");
        auto it = cells_.find(idx);
        return it == cells_.end() ? fill_ : it->second;
    }

    [[nodiscard]] const CostValue& operator()(std::span<const Value> x) const
    {
        if (x.size() != arity_)
            throw std::invalid_argument("cost function applied to tuple of wrong arity");
        for (auto a : x)
            if (a >= domain_)
                throw std::out_of_range("cost function argument outside domain");
        return at(encode_tuple(x, domain_));
    }
    [[nodiscard]] const CostValue& operator()(std::initializer_list<Value> x) const
    {
        return (*this)(std::span<const Value>(x.begin(), x.size()));
    }

    /// Calls fn(index, value) for every cell whose value is finite, in index order.
    template <typename Fn>
    void for_each_finite(Fn&& fn) const
    {
        if (is_dense_) {
            for (std::uint64_t i = 0; i < size_; ++i)
                if (dense_[i].is_finite())
                    fn(i, dense_[i]);
            return;
        }
        if (fill_.is_finite()) {
            for (std::uint64_t i = 0; i < size_; ++i) {
                const auto& c = at(i);
                if (c.is_finite())
                    fn(i, c);
            }
            return;
        }
        std::vector<std::pair<std::uint64_t, CostValue>> sorted(cells_.begin(), cells_.end());
        std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [i, c] : sorted)
            if (c.is_finite())
                fn(i, c);
    }

    /// Tuples of dom f in ascending encoding order.
    [[nodiscard]] std::vector<std::vector<Value>> dom_tuples() const
    {
        std::vector<std::vector<Value>> out;
        for_each_finite([&](std::uint64_t i, const CostValue&) {
            std::vector<Value> x(arity_);
            decode_tuple(i, domain_, x);
            out.push_back(std::move(x));
        });
        return out;
    }

    /// Range contained in {0, ∞}.
    [[nodiscard]] bool is_crisp() const
    {
        bool crisp = true;
        if (!is_dense_ && fill_.is_finite() && fill_ != CostValue(0))
            return false;
        for_each_finite([&](std::uint64_t, const CostValue& c) { crisp &= c == CostValue(0); });
        return crisp;
    }

    /// Most frequent value (ties: smallest) and the cells that differ from it.
    [[nodiscard]] std::pair<CostValue, std::vector<std::pair<std::uint64_t, CostValue>>> canonical_cells() const
    {
        CostValue fill;
        if (is_dense_) {
            std::map<CostValue, std::uint64_t> counts;
            for (const auto& c : dense_)
                ++counts[c];
            std::uint64_t best = 0;
            for (const auto& [v, n] : counts)
                if (n > best) {
                    best = n;
                    fill = v;
                }
        } else {
            fill = fill_;
        }
        std::vector<std::pair<std::uint64_t, CostValue>> out;
        if (is_dense_) {
            for (std::uint64_t i = 0; i < size_; ++i)
                if (!(dense_[i] == fill))
                    out.emplace_back(i, dense_[i]);
        } else {
            out.assign(cells_.begin(), cells_.end());
            std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        }
        return {fill, out};
    }

    friend bool operator==(const CostFunction& a, const CostFunction& b)
    {
        if (a.domain_ != b.domain_ || a.arity_ != b.arity_)
            return false;
        if (!a.is_dense_ && !b.is_dense_)
            return a.canonical_cells() == b.canonical_cells();
        for (std::uint64_t i = 0; i < a.size_; ++i)
            if (!(a.at(i) == b.at(i)))
                return false;
        return true;
    }

private:
    CostFunction(std::size_t domain, std::size_t arity) : domain_(domain), arity_(arity)
    {
        if (domain == 0)
            throw std::invalid_argument("cost function domain must be nonempty");
        if (arity == 0)
            throw std::invalid_argument("cost function arity must be positive");
        auto s = checked_power(domain, arity);
        if (!s)
            throw std::overflow_error("cost table size overflows 64 bits");
        size_ = *s;
    }

    std::size_t domain_ = 1;
    std::size_t arity_ = 1;
    std::uint64_t size_ = 1;
    bool is_dense_ = true;
    std::vector<CostValue> dense_{CostValue(0)};
    CostValue fill_;
    std::unordered_map<std::uint64_t, CostValue> cells_;
};

/// 0 where f is finite, ∞ elsewhere.
inline CostFunction dom(const CostFunction& f)
{
    std::vector<std::pair<std::uint64_t, CostValue>> cells;
    f.for_each_finite([&](std::uint64_t i, const CostValue&) { cells.emplace_back(i, CostValue(0)); });
    return CostFunction::sparse(f.domain_size(), f.arity(), CostValue::infinity(), cells);
}

/// The binary disequality relation on [d].
inline CostFunction neq_relation(std::size_t d)
{
    return CostFunction::tabulate(d, 2, [](std::span<const Value> x) {
        return x[0] != x[1] ? CostValue(0) : CostValue::infinity();
    });
}

struct ValuedLanguage {
    std::size_t domain_size = 1;
    std::vector<CostFunction> functions;
    /// External names; empty entries are rendered as f<i>.
    std::vector<std::string> names;

    [[nodiscard]] std::size_t size() const { return functions.size(); }

    [[nodiscard]] Signature signature() const
    {
        Signature s;
        for (const auto& f : functions)
            s.arities.push_back(f.arity());
        return s;
    }

    [[nodiscard]] std::string name(std::size_t i) const
    {
        if (i < names.size() && !names[i].empty())
            return names[i];
        return "f" + std::to_string(i);
    }

    [[nodiscard]] std::optional<std::size_t> find(const std::string& n) const
    {
        for (std::size_t i = 0; i < functions.size(); ++i)
            if (name(i) == n)
                return i;
        return std::nullopt;
    }

    [[nodiscard]] bool is_crisp() const
    {
        return std::all_of(functions.begin(), functions.end(), [](const auto& f) { return f.is_crisp(); });
    }

    /// Checks that every function lives on domain_size.
    void check() const
    {
        for (const auto& f : functions)
            if (f.domain_size() != domain_size)
                throw std::invalid_argument("language function domain differs from language domain");
    }
};

inline ValuedLanguage make_language(std::size_t d, std::vector<CostFunction> fs, std::vector<std::string> names = {})
{
    ValuedLanguage g{d, std::move(fs), std::move(names)};
    g.check();
    return g;
}

/// Relational structure on D whose i-th relation is dom f_i.
inline RelationalStructure language_structure(const ValuedLanguage& lang)
{
    std::vector<std::vector<Tuple>> rels;
    for (const auto& f : lang.functions) {
        std::vector<Tuple> r;
        for (auto& x : f.dom_tuples())
            r.emplace_back(x.begin(), x.end());
        rels.push_back(std::move(r));
    }
    return RelationalStructure(lang.domain_size, lang.signature(), std::move(rels));
}

struct Constraint {
    std::size_t function = 0;
    std::vector<std::size_t> vars;
    Rational weight{1};
};

struct Instance {
    std::shared_ptr<const ValuedLanguage> language;
    std::size_t num_vars = 0;
    std::vector<Constraint> constraints;

    [[nodiscard]] std::size_t domain_size() const { return language->domain_size; }

    [[nodiscard]] const CostFunction& function(const Constraint& c) const { return language->functions.at(c.function); }

    /// Throws std::invalid_argument on any broken invariant.
    void check() const
    {
        if (!language)
            throw std::invalid_argument("instance without language");
        for (const auto& c : constraints) {
            if (c.function >= language->size())
                throw std::invalid_argument("constraint references unknown function");
            if (c.vars.size() != language->functions[c.function].arity())
                throw std::invalid_argument("constraint scope length does not match arity");
            for (auto v : c.vars)
                if (v >= num_vars)
                    throw std::invalid_argument("constraint variable out of range");
            if (c.weight.sign() <= 0)
                throw std::invalid_argument("constraint weight must be strictly positive");
        }
    }
};

namespace detail {

    inline CostValue evaluate_unchecked(const Instance& inst, const Assignment& h)
    {
        CostValue total(0);
        std::vector<Value> x;
        for (const auto& c : inst.constraints) {
            x.resize(c.vars.size());
            for (std::size_t j = 0; j < c.vars.size(); ++j)
                x[j] = h[c.vars[j]];
            total += c.weight * inst.function(c)(x);
            if (total.is_infinite())
                return total;
        }
        return total;
    }

}  // namespace detail

/// Weighted sum of constraint costs under h; ∞ absorbs.
inline CostValue evaluate(const Instance& inst, const Assignment& h)
{
    inst.check();
    if (h.size() != inst.num_vars)
        throw std::invalid_argument("assignment is not total");
    for (auto a : h)
        if (a >= inst.domain_size())
            throw std::invalid_argument("assignment value outside domain");
    return detail::evaluate_unchecked(inst, h);
}

struct Solution {
    CostValue value;
    Assignment assignment;
};

/// Exact global minimum and the lexicographically least minimizer. Throws
/// BudgetExceeded when |D|^num_vars exceeds the budget.
inline Solution solve_bruteforce(const Instance& inst, std::uint64_t budget = kDefaultBudget)
{
    inst.check();
    const std::size_t d = inst.domain_size();
    const std::size_t n = inst.num_vars;
    auto space = checked_power(d, n);
    if (!space || *space > budget)
        throw BudgetExceeded("search space |D|^n exceeds budget");

    // Constraints are charged at the depth of their last variable, so partial
    // sums are exact and an ∞ partial sum prunes the whole subtree.
    std::vector<std::vector<std::size_t>> due(n + 1);
    for (std::size_t c = 0; c < inst.constraints.size(); ++c) {
        std::size_t last = 0;
        for (auto v : inst.constraints[c].vars)
            last = std::max(last, v + 1);
        due[last].push_back(c);
    }

    Solution best{CostValue::infinity(), Assignment(n, 0)};
    bool found = false;
    Assignment h(n, 0);
    std::vector<Value> x;

    auto charge = [&](std::size_t depth) {
        CostValue add(0);
        for (auto c : due[depth]) {
            const auto& con = inst.constraints[c];
            x.resize(con.vars.size());
            for (std::size_t j = 0; j < con.vars.size(); ++j)
                x[j] = h[con.vars[j]];
            add += con.weight * inst.function(con)(x);
            if (add.is_infinite())
                break;
        }
        return add;
    };

    std::function<void(std::size_t, const CostValue&)> rec = [&](std::size_t depth, const CostValue& acc) {
        if (depth == n) {
            if (!found || acc < best.value) {
                found = true;
                best.value = acc;
                best.assignment = h;
            }
            return;
        }
        for (Value a = 0; a < d; ++a) {
            h[depth] = a;
            auto next = acc + charge(depth + 1);
            if (next.is_infinite())
                continue;
            rec(depth + 1, next);
        }
    };
    auto base = charge(0);
    if (base.is_finite())
        rec(0, base);
    return best;
}

/// Decides R -> Γ for a crisp language by homomorphism search into the
/// structure of the relations dom f_i.
inline std::optional<VertexMap> csp_decide_bruteforce(const RelationalStructure& r, const ValuedLanguage& lang)
{
    if (!lang.is_crisp())
        throw std::invalid_argument("csp_decide requires a crisp language");
    return find_homomorphism(r, language_structure(lang));
}

using WeightRule = std::function<Rational(std::size_t relation, const Tuple& tuple)>;

/// One constraint (f_i, t) per tuple t of r_i; unit weights unless a rule is given.
inline Instance instance_from_structure(
    const RelationalStructure& r, std::shared_ptr<const ValuedLanguage> lang, const WeightRule& weight = {})
{
    if (!(r.signature() == lang->signature()))
        throw std::invalid_argument("signature mismatch between structure and language");
    Instance inst{lang, r.universe_size(), {}};
    for (std::size_t i = 0; i < r.num_relations(); ++i)
        for (const auto& t : r.relation(i))
            inst.constraints.push_back(
                {i, std::vector<std::size_t>(t.begin(), t.end()), weight ? weight(i, t) : Rational(1)});
    return inst;
}

/// The unary {0,1}-valued table on [d] whose value at a is bit a of mask.
inline CostFunction unary_indicator(std::size_t d, std::uint64_t mask)
{
    std::vector<CostValue> t(d);
    for (std::size_t a = 0; a < d; ++a)
        t[a] = CostValue((mask >> a) & 1U);
    return CostFunction::dense(d, 1, std::move(t));
}

/// Bit mask of a unary {0,1}-valued function, or nullopt.
inline std::optional<std::uint64_t> zero_one_mask(const CostFunction& f)
{
    if (f.arity() != 1 || f.domain_size() > 63)
        return std::nullopt;
    std::uint64_t mask = 0;
    for (std::size_t a = 0; a < f.domain_size(); ++a) {
        const auto& c = f.at(a);
        if (c == CostValue(1))
            mask |= std::uint64_t(1) << a;
        else if (!(c == CostValue(0)))
            return std::nullopt;
    }
    return mask;
}

/// Index of the unary language member equal to the indicator with this mask.
inline std::optional<std::size_t> find_unary_indicator(const ValuedLanguage& lang, std::uint64_t mask)
{
    for (std::size_t i = 0; i < lang.size(); ++i)
        if (auto m = zero_one_mask(lang.functions[i]); m && *m == mask)
            return i;
    return std::nullopt;
}

/// Contains every unary {0,1}-valued function on its domain.
inline bool is_conservative(const ValuedLanguage& lang)
{
    if (lang.domain_size > 30)
        throw std::invalid_argument("is_conservative: domain too large to enumerate unaries");
    std::vector<char> seen(std::size_t(1) << lang.domain_size, 0);
    for (const auto& f : lang.functions)
        if (auto m = zero_one_mask(f); m && f.domain_size() == lang.domain_size)
            seen[*m] = 1;
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
}

/// f(x) = min over the hidden variables of f_I(x, y), where x ranges over the
/// retained variables in the given order.
inline CostFunction express(const Instance& inst, const std::vector<std::size_t>& retained, std::uint64_t budget = kDefaultBudget)
{
    inst.check();
    if (retained.empty())
        throw std::invalid_argument("express needs at least one retained variable");
    std::vector<char> is_retained(inst.num_vars, 0);
    for (auto v : retained) {
        if (v >= inst.num_vars)
            throw std::invalid_argument("retained variable out of range");
        if (is_retained[v])
            throw std::invalid_argument("retained variables must be distinct");
        is_retained[v] = 1;
    }
    const std::size_t d = inst.domain_size();
    auto space = checked_power(d, inst.num_vars);
    if (!space || *space > budget)
        throw BudgetExceeded("expression enumeration exceeds budget");
    auto out_size = checked_power(d, retained.size());
    if (!out_size || *out_size > kDenseLimit)
        throw BudgetExceeded("expressed table too large");
    std::vector<CostValue> table(*out_size, CostValue::infinity());
    Assignment h(inst.num_vars, 0);
    std::vector<Value> x(retained.size());
    for (std::uint64_t i = 0; i < *space; ++i) {
        decode_tuple(i, d, h);
        auto v = detail::evaluate_unchecked(inst, h);
        for (std::size_t j = 0; j < retained.size(); ++j)
            x[j] = h[retained[j]];
        auto& cell = table[encode_tuple(x, d)];
        if (v < cell)
            cell = v;
    }
    return CostFunction::dense(d, retained.size(), std::move(table));
}

}  // namespace hcsp
