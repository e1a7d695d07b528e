#pragma once

// Operations, polymorphisms and fractional polymorphisms; Siggers pairs;
// symmetric tournament pairs (STP) and MJN triples; the conservative
// classification search and the projection/transfer of STP/MJN from a
// lifted domain back to the base domain.

#include "hcsp/coloring.hpp"
#include "hcsp/lifting.hpp"
#include "hcsp/search.hpp"
#include "hcsp/vcsp.hpp"

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace hcsp {

// ---------------------------------------------------------------------------
// Operations

/// m-ary operation on [d], table indexed by the most-significant-first
/// encoding of the argument tuple.
struct Operation {
    std::size_t domain_size = 0;
    std::size_t arity = 0;
    std::vector<Value> table;

    static Operation tabulate(std::size_t d, std::size_t m, const std::function<Value(std::span<const Value>)>& fn)
    {
        auto n = checked_power(d, m);
        if (!n || *n > kDenseLimit * 16)
            throw std::invalid_argument("operation table too large");
        Operation op{d, m, std::vector<Value>(*n)};
        std::vector<Value> x(m);
        for (std::uint64_t i = 0; i < *n; ++i) {
            decode_tuple(i, d, x);
            op.table[i] = fn(x);
            if (op.table[i] >= d)
                throw std::invalid_argument("operation value outside domain");
        }
        return op;
    }

    static Operation projection(std::size_t d, std::size_t m, std::size_t i)
    {
        if (i >= m)
            throw std::invalid_argument("projection index out of range");
        return tabulate(d, m, [i](std::span<const Value> x) { return x[i]; });
    }

    [[nodiscard]] Value operator()(std::span<const Value> x) const { return table[encode_tuple(x, domain_size)]; }
    [[nodiscard]] Value operator()(std::initializer_list<Value> x) const
    {
        return (*this)(std::span<const Value>(x.begin(), x.size()));
    }

    [[nodiscard]] bool idempotent() const
    {
        std::vector<Value> x(arity);
        for (Value a = 0; a < domain_size; ++a) {
            std::fill(x.begin(), x.end(), a);
            if ((*this)(x) != a)
                return false;
        }
        return true;
    }

    /// Canonical text form, also used as a total-order key.
    [[nodiscard]] std::string key() const
    {
        std::string s = std::to_string(domain_size) + ":" + std::to_string(arity) + ":";
        for (std::size_t i = 0; i < table.size(); ++i) {
            if (i)
                s += ',';
            s += std::to_string(table[i]);
        }
        return s;
    }

    friend bool operator==(const Operation&, const Operation&) = default;
    friend auto operator<=>(const Operation&, const Operation&) = default;
};

inline Operation op_min(std::size_t d)
{
    return Operation::tabulate(d, 2, [](std::span<const Value> x) { return std::min(x[0], x[1]); });
}

inline Operation op_max(std::size_t d)
{
    return Operation::tabulate(d, 2, [](std::span<const Value> x) { return std::max(x[0], x[1]); });
}

/// k-th smallest of the ternary arguments (0 = min, 1 = median, 2 = max).
inline Operation op_sorted(std::size_t d, std::size_t k)
{
    return Operation::tabulate(d, 3, [k](std::span<const Value> x) {
        std::array<Value, 3> s{x[0], x[1], x[2]};
        std::sort(s.begin(), s.end());
        return s[k];
    });
}

/// Majority on two-valued triples, first argument otherwise.
inline Operation op_majority(std::size_t d)
{
    return Operation::tabulate(d, 3, [](std::span<const Value> x) { return x[1] == x[2] ? x[1] : x[0]; });
}

/// Minority on two-valued triples, third argument otherwise.
inline Operation op_minority(std::size_t d)
{
    return Operation::tabulate(d, 3, [](std::span<const Value> x) {
        if (x[0] == x[1])
            return x[2];
        if (x[0] == x[2])
            return x[1];
        if (x[1] == x[2])
            return x[0];
        return x[2];
    });
}

/// m-ary conjunction on {0,1}.
inline Operation boolean_and(std::size_t m)
{
    return Operation::tabulate(2, m, [](std::span<const Value> x) {
        return static_cast<Value>(std::all_of(x.begin(), x.end(), [](Value v) { return v == 1; }));
    });
}

namespace detail {

    // y_j = g(x^1_j, ..., x^m_j)
    inline std::vector<Value> apply_columns(const Operation& g, const std::vector<const std::vector<Value>*>& rows)
    {
        const std::size_t r = rows.front()->size();
        std::vector<Value> col(rows.size()), y(r);
        for (std::size_t j = 0; j < r; ++j) {
            for (std::size_t i = 0; i < rows.size(); ++i)
                col[i] = (*rows[i])[j];
            y[j] = g(col);
        }
        return y;
    }

    // Odometer over T^m; fn returns false to stop.
    template <typename Fn>
    void for_each_row_choice(std::size_t t, std::size_t m, Fn&& fn)
    {
        if (t == 0)
            return;
        std::vector<std::size_t> idx(m, 0);
        while (fn(idx)) {
            std::size_t p = m;
            while (p > 0 && ++idx[p - 1] == t)
                idx[--p] = 0;
            if (p == 0)
                return;
        }
    }

}  // namespace detail

struct PolymorphismCheck {
    bool ok = true;
    /// Index of the failing function when checking a language.
    std::size_t function = 0;
    /// x^1, ..., x^m from dom f and their image outside dom f.
    std::vector<std::vector<Value>> arguments;
    std::vector<Value> image;
    explicit operator bool() const { return ok; }
};

/// g applied componentwise to tuples of dom f stays in dom f.
inline PolymorphismCheck is_polymorphism(const Operation& g, const CostFunction& f)
{
    if (g.domain_size != f.domain_size())
        throw std::invalid_argument("is_polymorphism: domain mismatch");
    auto dom_t = f.dom_tuples();
    PolymorphismCheck out;
    std::vector<const std::vector<Value>*> rows(g.arity);
    detail::for_each_row_choice(dom_t.size(), g.arity, [&](const std::vector<std::size_t>& idx) {
        for (std::size_t i = 0; i < idx.size(); ++i)
            rows[i] = &dom_t[idx[i]];
        auto y = detail::apply_columns(g, rows);
        if (f(y).is_infinite()) {
            out.ok = false;
            for (auto* r : rows)
                out.arguments.push_back(*r);
            out.image = y;
            return false;
        }
        return true;
    });
    return out;
}

inline PolymorphismCheck is_polymorphism(const Operation& g, const ValuedLanguage& lang)
{
    for (std::size_t i = 0; i < lang.size(); ++i) {
        auto c = is_polymorphism(g, lang.functions[i]);
        if (!c.ok) {
            c.function = i;
            return c;
        }
    }
    return {};
}

// ---------------------------------------------------------------------------
// Fractional operations

struct FractionalOperation {
    std::vector<std::pair<Operation, Rational>> support;

    [[nodiscard]] std::size_t arity() const { return support.empty() ? 0 : support.front().first.arity; }
    [[nodiscard]] std::size_t domain_size() const { return support.empty() ? 0 : support.front().first.domain_size; }

    /// Equal weights 1/k on the given operations (duplicates allowed).
    static FractionalOperation uniform(std::vector<Operation> ops)
    {
        FractionalOperation w;
        const auto k = static_cast<std::int64_t>(ops.size());
        for (auto& op : ops)
            w.support.emplace_back(std::move(op), Rational(1, k));
        return w;
    }

    /// Throws unless weights are positive, sum to 1, the arity and domain are
    /// common and the support is duplicate-free.
    void check() const
    {
        if (support.empty())
            throw std::invalid_argument("fractional operation with empty support");
        Rational total(0);
        for (std::size_t i = 0; i < support.size(); ++i) {
            const auto& [op, w] = support[i];
            if (w.sign() <= 0)
                throw std::invalid_argument("fractional operation weight must be positive");
            if (op.arity != arity() || op.domain_size != domain_size())
                throw std::invalid_argument("fractional operation support has mixed arity or domain");
            for (std::size_t j = 0; j < i; ++j)
                if (support[j].first == op)
                    throw std::invalid_argument("fractional operation support has duplicates");
            total += w;
        }
        if (total != Rational(1))
            throw std::invalid_argument("fractional operation weights do not sum to 1");
    }

    /// Same distribution with repeated support operations merged.
    [[nodiscard]] FractionalOperation normalized() const
    {
        FractionalOperation out;
        for (const auto& [op, w] : support) {
            auto it = std::find_if(out.support.begin(), out.support.end(), [&](const auto& e) { return e.first == op; });
            if (it == out.support.end())
                out.support.emplace_back(op, w);
            else
                it->second += w;
        }
        return out;
    }

    [[nodiscard]] std::string key() const
    {
        std::string s;
        for (const auto& [op, w] : support)
            s += w.str() + "*" + op.key() + ";";
        return s;
    }

    friend bool operator==(const FractionalOperation&, const FractionalOperation&) = default;
};

struct FractionalCheck {
    bool ok = true;
    std::size_t function = 0;
    std::vector<std::vector<Value>> arguments;
    CostValue lhs;
    CostValue rhs;
    explicit operator bool() const { return ok; }
};

/// sum_g w(g) f(g(x^1..x^m)) <= (1/m) sum_i f(x^i) for all x^i in dom f, exactly.
inline FractionalCheck is_fractional_polymorphism(const FractionalOperation& w, const CostFunction& f)
{
    const std::size_t m = w.arity();
    if (m == 0)
        throw std::invalid_argument("fractional operation with empty support");
    for (const auto& [op, wt] : w.support)
        if (op.domain_size != f.domain_size() || op.arity != m)
            throw std::invalid_argument("is_fractional_polymorphism: domain mismatch");
    auto dom_t = f.dom_tuples();
    std::vector<Rational> cost;
    for (const auto& x : dom_t)
        cost.push_back(f(x).value());
    const Rational inv_m(1, static_cast<std::int64_t>(m));
    FractionalCheck out;
    std::vector<const std::vector<Value>*> rows(m);
    detail::for_each_row_choice(dom_t.size(), m, [&](const std::vector<std::size_t>& idx) {
        Rational rhs(0);
        for (std::size_t i = 0; i < m; ++i) {
            rows[i] = &dom_t[idx[i]];
            rhs += cost[idx[i]];
        }
        rhs = rhs * inv_m;
        CostValue lhs(0);
        for (const auto& [op, wt] : w.support) {
            lhs += wt * f(detail::apply_columns(op, rows));
            if (lhs.is_infinite())
                break;
        }
        if (CostValue(rhs) < lhs) {
            out.ok = false;
            for (auto* r : rows)
                out.arguments.push_back(*r);
            out.lhs = lhs;
            out.rhs = CostValue(rhs);
            return false;
        }
        return true;
    });
    return out;
}

inline FractionalCheck is_fractional_polymorphism(const FractionalOperation& w, const ValuedLanguage& lang)
{
    for (std::size_t i = 0; i < lang.size(); ++i) {
        auto c = is_fractional_polymorphism(w, lang.functions[i]);
        if (!c.ok) {
            c.function = i;
            return c;
        }
    }
    return {};
}

// ---------------------------------------------------------------------------
// Restriction and Siggers pairs

struct Restriction {
    ValuedLanguage language;
    /// elements[i] is the original value relabeled to i.
    std::vector<Value> elements;
};

/// Gamma[A]: every function restricted to A-tuples, A relabeled to 0..|A|-1.
inline Restriction restrict_language(const ValuedLanguage& lang, std::vector<Value> a)
{
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    if (a.empty())
        throw std::invalid_argument("restrict_language: empty subdomain");
    if (a.back() >= lang.domain_size)
        throw std::invalid_argument("restrict_language: element outside domain");
    Restriction out;
    out.elements = a;
    out.language.domain_size = a.size();
    out.language.names = lang.names;
    std::vector<Value> y;
    for (const auto& f : lang.functions)
        out.language.functions.push_back(
            CostFunction::tabulate(a.size(), f.arity(), [&](std::span<const Value> x) -> CostValue {
                y.resize(x.size());
                for (std::size_t j = 0; j < x.size(); ++j)
                    y[j] = a[x[j]];
                return f(y);
            }));
    return out;
}

/// Idempotent on A and s(x,x,x,x,y,y) = s(x,y,x,y,x,x),
/// s(y,y,x,x,x,x) = s(x,x,y,x,y,x) for all x, y in A.
inline bool is_siggers_operation(const Operation& s, const std::vector<Value>& a)
{
    if (s.arity != 6)
        return false;
    for (auto x : a) {
        if (x >= s.domain_size)
            throw std::invalid_argument("is_siggers_operation: element outside domain");
        if (s({x, x, x, x, x, x}) != x)
            return false;
    }
    for (auto x : a)
        for (auto y : a) {
            if (s({x, x, x, x, y, y}) != s({x, y, x, y, x, x}))
                return false;
            if (s({y, y, x, x, x, x}) != s({x, x, y, x, y, x}))
                return false;
        }
    return true;
}

struct SiggersPair {
    /// Unary operation on D with g∘g = g.
    Operation g;
    /// 6-ary operation on the relabeled image 0..|A|-1.
    Operation s;
    /// A = g(D), ascending.
    std::vector<Value> image;
};

struct SiggersAttempt {
    Operation g;
    std::vector<Value> image;
    std::size_t tuples = 0;
    std::size_t classes = 0;
    std::uint64_t raw_constraints = 0;
    std::uint64_t constraints = 0;
    SearchStats stats;
    bool found = false;
};

struct SiggersSearch {
    std::uint64_t unary_candidates = 0;
    std::uint64_t admissible_unaries = 0;
    std::vector<SiggersAttempt> attempts;
    /// First pair found (g in lexicographic table order).
    std::optional<SiggersPair> pair;
    /// All pairs found when the search was not stopped early.
    std::vector<SiggersPair> all_pairs;
};

namespace detail {

    struct UnionFind {
        std::vector<std::size_t> parent;
        explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
        std::size_t find(std::size_t x)
        {
            while (parent[x] != x)
                x = parent[x] = parent[parent[x]];
            return x;
        }
        void unite(std::size_t a, std::size_t b)
        {
            a = find(a);
            b = find(b);
            if (a != b)
                parent[std::max(a, b)] = std::min(a, b);
        }
    };

    inline std::uint64_t code6(std::size_t a, std::initializer_list<Value> x)
    {
        return encode_tuple(std::span<const Value>(x.begin(), x.size()), a);
    }

    // Quotient CSP for a 6-ary Siggers polymorphism of a language on [a].
    inline std::optional<Operation> siggers_on(const ValuedLanguage& lang, SiggersAttempt& att)
    {
        const std::size_t a = lang.domain_size;
        const std::uint64_t n = *checked_power(a, 6);
        att.tuples = n;
        UnionFind uf(n);
        for (Value x = 0; x < a; ++x)
            for (Value y = 0; y < a; ++y) {
                if (x == y)
                    continue;
                uf.unite(code6(a, {x, x, x, x, y, y}), code6(a, {x, y, x, y, x, x}));
                uf.unite(code6(a, {y, y, x, x, x, x}), code6(a, {x, x, y, x, y, x}));
            }
        std::vector<std::size_t> cls(n);
        std::map<std::size_t, std::size_t> root_id;
        for (std::uint64_t i = 0; i < n; ++i) {
            auto r = uf.find(i);
            auto it = root_id.emplace(r, root_id.size()).first;
            cls[i] = it->second;
        }
        att.classes = root_id.size();
        TableCsp csp(att.classes, a);
        std::vector<std::optional<Value>> pinned(att.classes);
        for (Value x = 0; x < a; ++x) {
            auto c = cls[code6(a, {x, x, x, x, x, x})];
            if (pinned[c] && *pinned[c] != x)
                return std::nullopt;
            pinned[c] = x;
            csp.pin(c, x);
        }
        std::vector<Value> col(6);
        for (const auto& f : lang.functions) {
            auto t = f.dom_tuples();
            auto tid = csp.add_table(t);
            std::set<std::vector<std::size_t>> scopes;
            const std::size_t r = f.arity();
            for_each_row_choice(t.size(), 6, [&](const std::vector<std::size_t>& idx) {
                ++att.raw_constraints;
                std::vector<std::size_t> scope(r);
                for (std::size_t j = 0; j < r; ++j) {
                    for (std::size_t i = 0; i < 6; ++i)
                        col[i] = t[idx[i]][j];
                    scope[j] = cls[encode_tuple(col, a)];
                }
                scopes.insert(std::move(scope));
                return true;
            });
            if (t.empty()) {
                // Every 6-tuple of an empty relation is vacuous.
                continue;
            }
            for (const auto& s : scopes)
                csp.add_constraint(s, tid);
            att.constraints += scopes.size();
        }
        auto sol = csp.solve(&att.stats);
        if (!sol)
            return std::nullopt;
        Operation s{a, 6, std::vector<Value>(n)};
        for (std::uint64_t i = 0; i < n; ++i)
            s.table[i] = (*sol)[cls[i]];
        return s;
    }

}  // namespace detail

/// Enumerates unary g with g∘g = g preserving every relation (lexicographic
/// table order) and looks for a Siggers polymorphism of Gamma[g(D)].
inline SiggersSearch find_siggers_pair(const ValuedLanguage& lang, bool stop_at_first = true)
{
    if (!lang.is_crisp())
        throw std::invalid_argument("find_siggers_pair: language must be crisp");
    const std::size_t d = lang.domain_size;
    auto total = checked_power(d, d);
    if (!total || *total > 10'000'000)
        throw BudgetExceeded("find_siggers_pair: too many unary candidates");
    SiggersSearch out;
    Operation g{d, 1, std::vector<Value>(d, 0)};
    for (std::uint64_t c = 0; c < *total; ++c) {
        decode_tuple(c, d, g.table);
        ++out.unary_candidates;
        bool retraction = true;
        for (Value x = 0; x < d && retraction; ++x)
            retraction = g.table[g.table[x]] == g.table[x];
        if (!retraction || !is_polymorphism(g, lang))
            continue;
        ++out.admissible_unaries;
        std::vector<Value> image(g.table.begin(), g.table.end());
        auto restricted = restrict_language(lang, image);
        SiggersAttempt att;
        att.g = g;
        att.image = restricted.elements;
        auto s = detail::siggers_on(restricted.language, att);
        att.found = s.has_value();
        out.attempts.push_back(att);
        if (s) {
            SiggersPair p{g, *s, restricted.elements};
            if (!out.pair)
                out.pair = p;
            out.all_pairs.push_back(std::move(p));
            if (stop_at_first)
                break;
        }
    }
    return out;
}

/// Re-verifies a pair against a crisp language: g∘g = g, g preserves Gamma,
/// s is Siggers on the image and preserves Gamma[A].
inline bool is_admitted_pair(const SiggersPair& p, const ValuedLanguage& lang)
{
    const auto& g = p.g;
    if (g.arity != 1 || g.domain_size != lang.domain_size)
        return false;
    for (Value x = 0; x < g.domain_size; ++x)
        if (g.table[g.table[x]] != g.table[x])
            return false;
    std::vector<Value> image(g.table.begin(), g.table.end());
    std::sort(image.begin(), image.end());
    image.erase(std::unique(image.begin(), image.end()), image.end());
    if (image != p.image)
        return false;
    if (!is_polymorphism(g, lang))
        return false;
    auto r = restrict_language(lang, image);
    std::vector<Value> all(image.size());
    std::iota(all.begin(), all.end(), 0);
    return p.s.domain_size == image.size() && is_siggers_operation(p.s, all) && is_polymorphism(p.s, r.language);
}

struct ClosureCheck {
    bool ok = false;
    CostFunction expressed;
    bool g_preserves = false;
    bool s_preserves = false;
    /// Unary expressed functions only: g(B) ⊆ B and s((B∩A)^6) ⊆ B∩A.
    std::optional<bool> g_image_in_b;
    std::optional<bool> s_image_in_b;
};

/// Expresses a function from a gadget over Gamma and checks that the pair
/// admitted by Gamma is admitted by the expressed function too.
inline ClosureCheck check_siggers_closure(
    const SiggersPair& p, const ValuedLanguage& lang, const Instance& gadget, const std::vector<std::size_t>& retained)
{
    if (!is_admitted_pair(p, lang))
        throw std::invalid_argument("check_siggers_closure: pair is not admitted by the language");
    if (gadget.language->domain_size != lang.domain_size || gadget.language->size() != lang.size())
        throw std::invalid_argument("check_siggers_closure: gadget is not over the language");
    ClosureCheck out{false, express(gadget, retained), false, false, std::nullopt, std::nullopt};
    ValuedLanguage single{lang.domain_size, {out.expressed}, {"f"}};
    out.g_preserves = is_polymorphism(p.g, out.expressed).ok;
    auto r = restrict_language(single, p.image);
    out.s_preserves = is_polymorphism(p.s, r.language.functions[0]).ok;
    out.ok = out.g_preserves && out.s_preserves;
    if (out.expressed.arity() == 1) {
        std::vector<char> in_b(lang.domain_size, 0);
        for (Value x = 0; x < lang.domain_size; ++x)
            in_b[x] = out.expressed({x}).is_finite();
        bool gi = true;
        for (Value x = 0; x < lang.domain_size; ++x)
            if (in_b[x] && !in_b[p.g.table[x]])
                gi = false;
        // B∩A in relabeled coordinates.
        std::vector<Value> ba;
        for (Value i = 0; i < p.image.size(); ++i)
            if (in_b[p.image[i]])
                ba.push_back(i);
        bool si = true;
        if (!ba.empty())
            detail::for_each_row_choice(ba.size(), 6, [&](const std::vector<std::size_t>& idx) {
                std::vector<Value> x(6);
                for (std::size_t j = 0; j < 6; ++j)
                    x[j] = ba[idx[j]];
                if (!in_b[p.image[p.s(x)]]) {
                    si = false;
                    return false;
                }
                return true;
            });
        out.g_image_in_b = gi;
        out.s_image_in_b = si;
        out.ok = out.ok && gi && si;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Symmetric pair sets, STP and MJN

/// Set of unordered pairs {a, b}, a != b, over [d].
class SymmetricPairSet {
public:
    SymmetricPairSet() = default;
    explicit SymmetricPairSet(std::size_t d) : d_(d), bits_(d * d, 0) {}

    static SymmetricPairSet full(std::size_t d)
    {
        SymmetricPairSet s(d);
        for (Value a = 0; a < d; ++a)
            for (Value b = a + 1; b < d; ++b)
                s.insert(a, b);
        return s;
    }

    /// Bit i of mask selects the i-th pair of all_pairs(d).
    static SymmetricPairSet from_mask(std::size_t d, std::uint64_t mask)
    {
        SymmetricPairSet s(d);
        auto ps = all_pairs(d);
        for (std::size_t i = 0; i < ps.size(); ++i)
            if ((mask >> i) & 1U)
                s.insert(ps[i].first, ps[i].second);
        return s;
    }

    /// Pairs a < b in lexicographic order.
    static std::vector<std::pair<Value, Value>> all_pairs(std::size_t d)
    {
        std::vector<std::pair<Value, Value>> out;
        for (Value a = 0; a < d; ++a)
            for (Value b = a + 1; b < d; ++b)
                out.emplace_back(a, b);
        return out;
    }

    [[nodiscard]] std::size_t domain_size() const { return d_; }
    [[nodiscard]] bool contains(Value a, Value b) const { return a != b && bits_.at(a * d_ + b); }
    void insert(Value a, Value b)
    {
        if (a == b || a >= d_ || b >= d_)
            throw std::invalid_argument("pair set entries must be distinct domain values");
        bits_[a * d_ + b] = bits_[b * d_ + a] = 1;
    }

    /// P minus this set.
    [[nodiscard]] SymmetricPairSet complement() const
    {
        SymmetricPairSet s(d_);
        for (Value a = 0; a < d_; ++a)
            for (Value b = a + 1; b < d_; ++b)
                if (!contains(a, b))
                    s.insert(a, b);
        return s;
    }

    [[nodiscard]] std::vector<std::pair<Value, Value>> pairs() const
    {
        std::vector<std::pair<Value, Value>> out;
        for (auto [a, b] : all_pairs(d_))
            if (contains(a, b))
                out.emplace_back(a, b);
        return out;
    }
    [[nodiscard]] std::size_t size() const { return pairs().size(); }

    [[nodiscard]] std::string key() const
    {
        std::string s = "{";
        for (auto [a, b] : pairs())
            s += "(" + std::to_string(a) + "," + std::to_string(b) + ")";
        return s + "}";
    }

    friend bool operator==(const SymmetricPairSet&, const SymmetricPairSet&) = default;

private:
    std::size_t d_ = 0;
    std::vector<char> bits_;
};

namespace detail {

    inline void require_ops(const FractionalOperation& w, std::size_t k, std::size_t m, const char* what)
    {
        if (w.support.size() != k)
            throw std::invalid_argument(std::string(what) + ": wrong support size");
        for (const auto& [op, wt] : w.support)
            if (op.arity != m || wt != Rational(1, static_cast<std::int64_t>(k)))
                throw std::invalid_argument(std::string(what) + ": wrong support shape");
    }

    template <std::size_t N>
    bool is_permutation_of(std::array<Value, N> out, std::array<Value, N> in)
    {
        std::sort(out.begin(), out.end());
        std::sort(in.begin(), in.end());
        return out == in;
    }

}  // namespace detail

/// meet, join commute on M and (a meet b, a join b) permutes (a, b) everywhere.
inline bool is_stp(const Operation& meet, const Operation& join, const SymmetricPairSet& m)
{
    const std::size_t d = meet.domain_size;
    if (meet.arity != 2 || join.arity != 2 || join.domain_size != d || m.domain_size() != d)
        throw std::invalid_argument("is_stp: two binary operations on the pair-set domain required");
    for (Value a = 0; a < d; ++a)
        for (Value b = 0; b < d; ++b) {
            if (!detail::is_permutation_of<2>({meet({a, b}), join({a, b})}, {a, b}))
                return false;
            if (m.contains(a, b) && (meet({a, b}) != meet({b, a}) || join({a, b}) != join({b, a})))
                return false;
        }
    return true;
}

inline bool is_stp(const FractionalOperation& w, const SymmetricPairSet& m)
{
    detail::require_ops(w, 2, 2, "is_stp");
    return is_stp(w.support[0].first, w.support[1].first, m);
}

/// Outputs permute the inputs; on two-valued triples over a pair of M the
/// first two give the majority and the third the minority.
inline bool is_mjn(const Operation& f1, const Operation& f2, const Operation& f3, const SymmetricPairSet& m)
{
    const std::size_t d = f1.domain_size;
    for (const auto* f : {&f1, &f2, &f3})
        if (f->arity != 3 || f->domain_size != d)
            throw std::invalid_argument("is_mjn: three ternary operations on one domain required");
    if (m.domain_size() != d)
        throw std::invalid_argument("is_mjn: pair set over a different domain");
    for (Value a = 0; a < d; ++a)
        for (Value b = 0; b < d; ++b)
            for (Value c = 0; c < d; ++c) {
                std::array<Value, 3> x{a, b, c};
                std::array<Value, 3> y{f1(x), f2(x), f3(x)};
                if (!detail::is_permutation_of<3>(y, x))
                    return false;
                std::array<Value, 3> s = x;
                std::sort(s.begin(), s.end());
                bool two_valued = (s[0] == s[1]) != (s[1] == s[2]);
                if (!two_valued)
                    continue;
                Value maj = s[1];
                Value mnr = s[0] == s[1] ? s[2] : s[0];
                if (m.contains(maj, mnr) && (y[0] != maj || y[1] != maj || y[2] != mnr))
                    return false;
            }
    return true;
}

inline bool is_mjn(const FractionalOperation& w, const SymmetricPairSet& m)
{
    detail::require_ops(w, 3, 3, "is_mjn");
    return is_mjn(w.support[0].first, w.support[1].first, w.support[2].first, m);
}

struct StpMjn {
    Operation meet;
    Operation join;
    std::array<Operation, 3> mjn;
    SymmetricPairSet pairs;

    [[nodiscard]] FractionalOperation sigma() const { return FractionalOperation::uniform({meet, join}); }
    [[nodiscard]] FractionalOperation mu() const { return FractionalOperation::uniform({mjn[0], mjn[1], mjn[2]}); }
    [[nodiscard]] std::string key() const
    {
        return meet.key() + "|" + join.key() + "|" + mjn[0].key() + "|" + mjn[1].key() + "|" + mjn[2].key() + "|"
            + pairs.key();
    }
};

// ---------------------------------------------------------------------------
// Candidate search for conservative classification

/// A pruned family of candidates: every completion of the partial choice
/// fails the inequality at the witness.
struct PrunedCandidates {
    /// Output tuples chosen so far, one per input in lexicographic order.
    std::vector<std::vector<Value>> partial;
    std::size_t function = 0;
    std::vector<std::vector<Value>> witness;
    std::uint64_t covered = 0;
};

struct CandidateSearch {
    std::uint64_t candidates = 0;
    std::uint64_t covered = 0;
    std::vector<PrunedCandidates> pruned;
    bool truncated = false;
    /// Output k-tuple per input, for the first successful candidate.
    std::optional<std::vector<std::vector<Value>>> found;
};

namespace detail {

    // k operations of arity m (k == m) on [d], given per input by a list of
    // allowed output k-tuples, or tied to an earlier input's output.
    struct CandidateSpace {
        std::size_t d = 0;
        std::size_t m = 0;
        std::vector<std::vector<std::vector<Value>>> options;
        std::vector<std::optional<std::size_t>> link;
    };

    inline constexpr std::size_t kMaxPrunedRecords = 200'000;

    inline std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b)
    {
        if (a != 0 && b > UINT64_MAX / a)
            return UINT64_MAX;
        return a * b;
    }

    // Searches the candidate space in lexicographic order for one whose k
    // operations (weights 1/k) form a fractional polymorphism of lang.
    inline CandidateSearch search_candidates(const CandidateSpace& sp, const ValuedLanguage& lang)
    {
        const std::size_t n = sp.options.size();
        const std::size_t m = sp.m;
        // suffix[i] = product of free option counts for inputs >= i.
        std::vector<std::uint64_t> suffix(n + 1, 1);
        for (std::size_t i = n; i-- > 0;)
            suffix[i] = sp.link[i] ? suffix[i + 1] : sat_mul(suffix[i + 1], sp.options[i].size());

        struct Check {
            std::size_t function;
            std::vector<std::size_t> rows;
            std::vector<std::uint64_t> codes;
            Rational rhs;
        };
        std::vector<std::vector<Check>> by_trigger(n);
        std::vector<std::vector<std::vector<Value>>> doms;
        for (std::size_t fi = 0; fi < lang.size(); ++fi) {
            const auto& f = lang.functions[fi];
            doms.push_back(f.dom_tuples());
            const auto& t = doms.back();
            std::vector<Value> col(m);
            for_each_row_choice(t.size(), m, [&](const std::vector<std::size_t>& idx) {
                Check c{fi, idx, {}, Rational(0)};
                std::size_t trig = 0;
                for (std::size_t j = 0; j < f.arity(); ++j) {
                    for (std::size_t i = 0; i < m; ++i)
                        col[i] = t[idx[i]][j];
                    auto code = encode_tuple(col, sp.d);
                    c.codes.push_back(code);
                    trig = std::max<std::size_t>(trig, code);
                }
                for (auto r : idx)
                    c.rhs += f(t[r]).value();
                by_trigger[trig].push_back(std::move(c));
                return true;
            });
        }

        CandidateSearch out;
        out.candidates = suffix[0];
        std::vector<const std::vector<Value>*> chosen(n, nullptr);
        std::vector<Value> y;

        auto run_checks = [&](std::size_t i) -> const Check* {
            for (const auto& c : by_trigger[i]) {
                const auto& f = lang.functions[c.function];
                CostValue lhs(0);
                y.resize(c.codes.size());
                for (std::size_t o = 0; o < m && lhs.is_finite(); ++o) {
                    for (std::size_t j = 0; j < c.codes.size(); ++j)
                        y[j] = (*chosen[c.codes[j]])[o];
                    lhs += f(y);
                }
                if (CostValue(c.rhs) < lhs)
                    return &c;
            }
            return nullptr;
        };

        std::function<bool(std::size_t)> rec = [&](std::size_t i) -> bool {
            if (i == n)
                return true;
            if (sp.link[i]) {
                chosen[i] = chosen[*sp.link[i]];
                if (const Check* bad = run_checks(i)) {
                    out.covered += suffix[i + 1];
                    if (out.pruned.size() < kMaxPrunedRecords) {
                        PrunedCandidates p{{}, bad->function, {}, suffix[i + 1]};
                        for (std::size_t j = 0; j <= i; ++j)
                            p.partial.push_back(*chosen[j]);
                        for (auto r : bad->rows)
                            p.witness.push_back(doms[bad->function][r]);
                        out.pruned.push_back(std::move(p));
                    } else {
                        out.truncated = true;
                    }
                    return false;
                }
                return rec(i + 1);
            }
            for (const auto& opt : sp.options[i]) {
                chosen[i] = &opt;
                if (const Check* bad = run_checks(i)) {
                    out.covered += suffix[i + 1];
                    if (out.pruned.size() < kMaxPrunedRecords) {
                        PrunedCandidates p{{}, bad->function, {}, suffix[i + 1]};
                        for (std::size_t j = 0; j <= i; ++j)
                            p.partial.push_back(*chosen[j]);
                        for (auto r : bad->rows)
                            p.witness.push_back(doms[bad->function][r]);
                        out.pruned.push_back(std::move(p));
                    } else {
                        out.truncated = true;
                    }
                    continue;
                }
                if (rec(i + 1))
                    return true;
            }
            return false;
        };
        if (rec(0)) {
            std::vector<std::vector<Value>> res(n);
            for (std::size_t i = 0; i < n; ++i)
                res[i] = *chosen[i];
            out.found = std::move(res);
        }
        return out;
    }

    inline CandidateSpace stp_space(std::size_t d, const SymmetricPairSet& m)
    {
        CandidateSpace sp{d, 2, std::vector<std::vector<std::vector<Value>>>(d * d), std::vector<std::optional<std::size_t>>(d * d)};
        for (Value a = 0; a < d; ++a)
            for (Value b = 0; b < d; ++b) {
                auto code = a * d + b;
                if (a == b)
                    sp.options[code] = {{a, a}};
                else if (m.contains(a, b) && a > b)
                    sp.link[code] = b * d + a;
                else
                    sp.options[code] = {{std::min(a, b), std::max(a, b)}, {std::max(a, b), std::min(a, b)}};
            }
        return sp;
    }

    // MJN candidates; majority rules apply on pairs of mjn_pairs.
    inline CandidateSpace mjn_space(std::size_t d, const SymmetricPairSet& mjn_pairs)
    {
        const std::size_t n = d * d * d;
        CandidateSpace sp{d, 3, std::vector<std::vector<std::vector<Value>>>(n), std::vector<std::optional<std::size_t>>(n)};
        std::vector<Value> x(3);
        for (std::size_t code = 0; code < n; ++code) {
            decode_tuple(code, d, x);
            std::vector<Value> s = x;
            std::sort(s.begin(), s.end());
            bool two_valued = (s[0] == s[1]) != (s[1] == s[2]);
            if (two_valued) {
                Value maj = s[1];
                Value mnr = s[0] == s[1] ? s[2] : s[0];
                if (mjn_pairs.contains(maj, mnr)) {
                    sp.options[code] = {{maj, maj, mnr}};
                    continue;
                }
            }
            do
                sp.options[code].push_back(s);
            while (std::next_permutation(s.begin(), s.end()));
        }
        return sp;
    }

    inline std::vector<Operation> ops_from_outputs(std::size_t d, std::size_t m, const std::vector<std::vector<Value>>& outs)
    {
        std::vector<Operation> ops(m, Operation{d, m, std::vector<Value>(outs.size())});
        for (std::size_t i = 0; i < outs.size(); ++i)
            for (std::size_t o = 0; o < m; ++o)
                ops[o].table[i] = outs[i][o];
        return ops;
    }

}  // namespace detail

/// First STP on M (lexicographic in the joint table x -> (meet(x), join(x)))
/// that is a fractional polymorphism of lang.
inline CandidateSearch search_stp(const ValuedLanguage& lang, const SymmetricPairSet& m)
{
    return detail::search_candidates(detail::stp_space(lang.domain_size, m), lang);
}

/// First MJN whose majority rules apply on mjn_pairs.
inline CandidateSearch search_mjn(const ValuedLanguage& lang, const SymmetricPairSet& mjn_pairs)
{
    return detail::search_candidates(detail::mjn_space(lang.domain_size, mjn_pairs), lang);
}

struct PairSetAttempt {
    SymmetricPairSet pairs;
    CandidateSearch stp;
    /// Not searched when no STP exists on this M.
    std::optional<CandidateSearch> mjn;
};

struct ConservativeClassification {
    enum class Verdict { Tractable, NPHard };
    Verdict verdict = Verdict::NPHard;
    std::optional<StpMjn> witness;
    std::vector<PairSetAttempt> attempts;

    [[nodiscard]] bool tractable() const { return verdict == Verdict::Tractable; }
};

inline constexpr std::size_t kMaxClassifyDomain = 3;

/// Runs over every symmetric M ⊆ P (bitmask order over sorted pairs) and
/// returns the first M with an STP on M and an MJN on P minus M that are
/// both fractional polymorphisms of the language.
inline ConservativeClassification classify_conservative(const ValuedLanguage& lang)
{
    const std::size_t d = lang.domain_size;
    if (d > kMaxClassifyDomain)
        throw std::invalid_argument("classify_conservative: domain larger than 3");
    if (!is_conservative(lang))
        throw std::invalid_argument("classify_conservative: language is not conservative");
    ConservativeClassification out;
    const auto np = SymmetricPairSet::all_pairs(d).size();
    for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << np); ++mask) {
        PairSetAttempt att{SymmetricPairSet::from_mask(d, mask), {}, std::nullopt};
        att.stp = search_stp(lang, att.pairs);
        if (att.stp.found) {
            att.mjn = search_mjn(lang, att.pairs.complement());
            if (att.mjn->found) {
                auto st = detail::ops_from_outputs(d, 2, *att.stp.found);
                auto mj = detail::ops_from_outputs(d, 3, *att.mjn->found);
                out.verdict = ConservativeClassification::Verdict::Tractable;
                out.witness = StpMjn{st[0], st[1], {mj[0], mj[1], mj[2]}, att.pairs};
                out.attempts.push_back(std::move(att));
                return out;
            }
        }
        out.attempts.push_back(std::move(att));
    }
    return out;
}

/// Every attempt was refuted with full coverage of its candidate space.
inline bool exhaustion_complete(const ConservativeClassification& c)
{
    if (c.tractable())
        return false;
    for (const auto& a : c.attempts) {
        const auto& s = a.mjn && !a.mjn->found ? *a.mjn : a.stp;
        if (s.found || s.covered != s.candidates)
            return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Projection to copies and transfer

struct ProjectedOps {
    Operation meet;
    Operation join;
    std::array<Operation, 3> mjn;
    SymmetricPairSet pairs;
    bool stp_ok = false;
    bool mjn_ok = false;

    [[nodiscard]] StpMjn triple() const { return {meet, join, mjn, pairs}; }
};

/// Conjugates lifted operations to the copy of v: a op b = d(d_v(a) op d_v(b)).
inline ProjectedOps project_ops(const StpMjn& lifted, const LiftedDomain& ld, Element v)
{
    const std::size_t dr = ld.size();
    if (lifted.meet.domain_size != dr || lifted.pairs.domain_size() != dr)
        throw std::invalid_argument("project_ops: operations are not over the lifted domain");
    if (!is_stp(lifted.meet, lifted.join, lifted.pairs)
        || !is_mjn(lifted.mjn[0], lifted.mjn[1], lifted.mjn[2], lifted.pairs.complement()))
        throw std::invalid_argument("project_ops: lifted operations are not an STP/MJN");
    const std::size_t d = ld.base_size();
    auto conj = [&](const Operation& op) {
        return Operation::tabulate(d, op.arity, [&](std::span<const Value> x) {
            std::vector<Value> y(x.size());
            for (std::size_t j = 0; j < x.size(); ++j)
                y[j] = ld.embed(v, x[j]);
            auto z = op(y);
            if (ld.copy_of(z) != v)
                throw std::logic_error("project_ops: operation leaves the copy");
            return ld.project(z);
        });
    };
    ProjectedOps p{conj(lifted.meet), conj(lifted.join),
        {conj(lifted.mjn[0]), conj(lifted.mjn[1]), conj(lifted.mjn[2])}, SymmetricPairSet(d)};
    for (Value a = 0; a < d; ++a)
        for (Value b = a + 1; b < d; ++b)
            if (lifted.pairs.contains(ld.embed(v, a), ld.embed(v, b)))
                p.pairs.insert(a, b);
    p.stp_ok = is_stp(p.meet, p.join, p.pairs);
    p.mjn_ok = is_mjn(p.mjn[0], p.mjn[1], p.mjn[2], p.pairs.complement());
    return p;
}

/// The same base STP/MJN in every copy; across copies the meet/join are the
/// first/second projections and the MJN uses majority rules on two-valued
/// triples (their pairs lie outside M_R) and projections otherwise.
inline StpMjn blockwise_uniform(const StpMjn& base, const LiftedDomain& ld)
{
    const std::size_t d = ld.base_size();
    if (base.meet.domain_size != d)
        throw std::invalid_argument("blockwise_uniform: base operations over a different domain");
    const std::size_t dr = ld.size();
    auto same_copy = [&](std::span<const Value> x) {
        for (auto b : x)
            if (ld.copy_of(b) != ld.copy_of(x[0]))
                return false;
        return true;
    };
    auto within = [&](const Operation& op, std::span<const Value> x) {
        Element v = ld.copy_of(x[0]);
        std::vector<Value> y(x.size());
        for (std::size_t j = 0; j < x.size(); ++j)
            y[j] = ld.project(x[j]);
        return ld.embed(v, op(y));
    };
    StpMjn out;
    out.meet = Operation::tabulate(dr, 2, [&](std::span<const Value> x) { return same_copy(x) ? within(base.meet, x) : x[0]; });
    out.join = Operation::tabulate(dr, 2, [&](std::span<const Value> x) { return same_copy(x) ? within(base.join, x) : x[1]; });
    for (std::size_t o = 0; o < 3; ++o)
        out.mjn[o] = Operation::tabulate(dr, 3, [&](std::span<const Value> x) {
            if (same_copy(x))
                return within(base.mjn[o], x);
            std::array<Value, 3> s{x[0], x[1], x[2]};
            std::sort(s.begin(), s.end());
            bool two_valued = (s[0] == s[1]) != (s[1] == s[2]);
            if (two_valued) {
                Value maj = s[1];
                Value mnr = s[0] == s[1] ? s[2] : s[0];
                return o < 2 ? maj : mnr;
            }
            return x[o];
        });
    out.pairs = SymmetricPairSet(dr);
    for (Element v = 0; v < ld.num_vertices(); ++v)
        for (auto [a, b] : base.pairs.pairs())
            out.pairs.insert(ld.embed(v, a), ld.embed(v, b));
    return out;
}

struct Transferred {
    StpMjn triple;
    /// One tuple per relation, all entries carrying the chosen triple.
    std::vector<Tuple> witnesses;
    bool sigma_verified = false;
    bool mu_verified = false;
    std::size_t distinct_triples = 0;
};

struct NoMonochromaticWitness {
    std::size_t distinct_triples = 0;
};

using TransferResult = std::variant<Transferred, NoMonochromaticWitness>;

inline constexpr std::size_t kMaxDeltaEnumeration = 10;

/// Checks the lifted STP/MJN on Gamma_R ∪ Delta_R, colors every vertex by its
/// projected triple and looks for a triple hitting every relation with a
/// monochromatic tuple; that triple is then verified on Gamma.
inline TransferResult transfer_tractability(
    const ValuedLanguage& base, const RelationalStructure& r, const StpMjn& lifted)
{
    if (!is_conservative(base))
        throw std::invalid_argument("transfer_tractability: base language is not conservative");
    auto ll = lift_language(base, r);
    const auto& ld = ll.domain;
    auto sigma = lifted.sigma();
    auto mu = lifted.mu();
    if (!is_fractional_polymorphism(sigma, *ll.language) || !is_fractional_polymorphism(mu, *ll.language))
        throw std::invalid_argument("transfer_tractability: not a fractional polymorphism of the lifted language");
    if (ld.size() <= kMaxDeltaEnumeration) {
        DeltaSet ds(ld);
        bool ok = true;
        ds.for_each([&](std::uint64_t, const CostFunction& f) {
            ok = ok && is_fractional_polymorphism(sigma, f) && is_fractional_polymorphism(mu, f);
        });
        if (!ok)
            throw std::invalid_argument("transfer_tractability: not a fractional polymorphism of Delta_R");
    } else if (!is_stp(lifted.meet, lifted.join, SymmetricPairSet(ld.size()))
        || !is_mjn(lifted.mjn[0], lifted.mjn[1], lifted.mjn[2], SymmetricPairSet(ld.size()))) {
        // Input-permuting operations preserve every unary function with equality.
        throw std::invalid_argument("transfer_tractability: operations do not permute their inputs");
    }

    std::vector<std::size_t> color(r.universe_size());
    std::vector<StpMjn> palette;
    std::map<std::string, std::size_t> ids;
    for (Element v = 0; v < r.universe_size(); ++v) {
        auto p = project_ops(lifted, ld, v);
        if (!p.stp_ok || !p.mjn_ok)
            throw std::logic_error("transfer_tractability: projection is not an STP/MJN");
        auto t = p.triple();
        auto [it, fresh] = ids.emplace(t.key(), palette.size());
        if (fresh)
            palette.push_back(t);
        color[v] = it->second;
    }
    for (std::size_t j = 0; j < palette.size(); ++j) {
        std::vector<Tuple> wit;
        for (std::size_t i = 0; i < r.num_relations(); ++i)
            for (const auto& t : r.relation(i))
                if (monochromatic(t, color, j)) {
                    wit.push_back(t);
                    break;
                }
        if (wit.size() != r.num_relations())
            continue;
        Transferred tr{palette[j], wit, false, false, palette.size()};
        tr.sigma_verified = is_fractional_polymorphism(palette[j].sigma(), base).ok;
        tr.mu_verified = is_fractional_polymorphism(palette[j].mu(), base).ok;
        return tr;
    }
    return NoMonochromaticWitness{palette.size()};
}

}  // namespace hcsp
